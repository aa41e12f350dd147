"""Free-field evaluation and exact Ward-identity checks."""
