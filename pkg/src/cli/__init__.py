"""Command-line argument parsing for the experiment runner."""
