"""Dataset tooling, evaluation runs, analyses and the smoke trainer."""
