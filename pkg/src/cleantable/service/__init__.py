"""Live training session service."""
