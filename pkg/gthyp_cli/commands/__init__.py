"""Sub-commands. Each module exposes register(cli)."""
