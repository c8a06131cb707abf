"""Figure rendering for periodic-pitman CSV output."""
