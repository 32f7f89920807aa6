from hypothesis import settings

settings.register_profile("qkc", deadline=None, max_examples=60)
settings.load_profile("qkc")
