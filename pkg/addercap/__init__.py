__all__ = ["capacity", "coding", "constants", "errors"]
