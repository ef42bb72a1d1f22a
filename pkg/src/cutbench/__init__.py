"""Circuit-cutting benchmark toolkit."""
