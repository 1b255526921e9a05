"""tmdyn command adapters."""
