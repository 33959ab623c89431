"""Output generation: CSV/SVG artifacts and markdown reports."""
