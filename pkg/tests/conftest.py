from hypothesis import settings

# reproducible property tests: same example stream on every run, no wall-clock
# flakiness on loaded machines
settings.register_profile("deterministic", derandomize=True, deadline=None)
settings.load_profile("deterministic")
