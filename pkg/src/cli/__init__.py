# CLI package - Command-line interface for polarfloor
