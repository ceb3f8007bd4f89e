"""daprobe command-line scripts."""
