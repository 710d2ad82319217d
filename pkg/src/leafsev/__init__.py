"""Coffee-leaf infection severity from a single photograph."""
