"""Shape-of-orientation-histogram features and Artcode proposal detection."""
__version__ = "0.1.0"
