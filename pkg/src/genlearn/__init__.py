__license__ = "Apache License 2.0"
__version__ = "0.1.0"

# Generative models and divergences implemented from scratch with numpy, pandas and scipy.
