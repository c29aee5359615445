"""Domain services, one module per simulation concern."""
