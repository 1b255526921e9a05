"""tmdyn helpers."""
