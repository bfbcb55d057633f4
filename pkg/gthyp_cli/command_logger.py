"""Auto-logging proxy for CLI sub-commands.

Wraps argparse sub-command registration so every handler invocation is
logged with its name, status, duration and a truncated argument summary.
"""

import json
import logging
import time
from functools import wraps

logger = logging.getLogger(__name__)


def _truncate(value, max_len: int) -> str | None:
    """Truncate a string to max_len characters."""
    if value is None:
        return None
    s = str(value)
    if len(s) > max_len:
        return s[:max_len] + "..."
    return s


def _summarize_args(params: dict, max_len: int = 200) -> str | None:
    """Truncated JSON summary of parsed arguments, without the handler itself."""
    if not params:
        return None
    filtered = {k: v for k, v in params.items() if k not in {"handler", "command"}}
    return _truncate(json.dumps(filtered, ensure_ascii=False, default=str), max_len)


class AutoLoggingCLI:
    """Proxy over an argparse subparsers action.

    Usage:
        cli = AutoLoggingCLI(parser.add_subparsers(dest="command", required=True))
        sub = cli.add_command("bound", help="...")

        @cli.handler(sub)
        def bound(args, settings): ...
    """

    def __init__(self, subparsers, exclude: set[str] | None = None):
        self._subparsers = subparsers
        self._exclude = exclude or set()

    def add_command(self, name: str, help: str):
        parser = self._subparsers.add_parser(name, help=help, description=help)
        parser.set_defaults(command=name)
        return parser

    def handler(self, parser):
        """Return a decorator installing fn as the parser's logged handler."""

        def decorator(fn):
            command = parser.get_default("command") or fn.__name__

            if command in self._exclude:
                parser.set_defaults(handler=fn)
                return fn

            @wraps(fn)
            def wrapper(args, *rest, **kwargs):
                start = time.monotonic()
                status = "success"
                try:
                    return fn(args, *rest, **kwargs)
                except Exception as e:
                    status = f"error:{type(e).__name__}"
                    raise
                finally:
                    elapsed_ms = int((time.monotonic() - start) * 1000)
                    self._log(command, status, vars(args), elapsed_ms)

            parser.set_defaults(handler=wrapper)
            return wrapper

        return decorator

    def _log(self, command, status, params, duration_ms):
        """Never raises: a logging failure must not change a command's outcome."""
        try:
            logger.info(
                f"command={command} status={status} duration_ms={duration_ms} "
                f"args={_summarize_args(params)}"
            )
        except Exception:
            pass
