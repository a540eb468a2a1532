"""
Shared plumbing for the identification management commands.

Exit codes: 0 success, 1 usage or input error, 2 algorithmic failure.
"""
import argparse
import io
import sys

from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ParseError
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer

from identification.exceptions import (
    ConfigurationError,
    DataFormatError,
    InsufficientDataError,
    UnstableModelError,
)

USAGE_ERROR = 1
ALGORITHM_ERROR = 2

INPUT_ERRORS = (ConfigurationError, DataFormatError, InsufficientDataError, UnstableModelError)


def float_list(text):
    """argparse type for comma-separated coefficients, e.g. ``-0.4,0.6``."""
    if not text.strip():
        return []
    try:
        return [float(item) for item in text.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


class IdentificationCommand(BaseCommand):

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        called_from_command_line = parser.called_from_command_line

        def error(message):
            if called_from_command_line:
                parser.print_usage(sys.stderr)
                parser.exit(USAGE_ERROR, f"{parser.prog}: error: {message}\n")
            raise CommandError(f"Error: {message}", returncode=USAGE_ERROR)

        parser.error = error
        return parser

    def fail(self, exc):
        """Translate a domain error into CommandError with the matching exit code."""
        returncode = USAGE_ERROR if isinstance(exc, INPUT_ERRORS) else ALGORITHM_ERROR
        raise CommandError(str(exc), returncode=returncode) from exc

    def write_json(self, data, path=None):
        content = JSONRenderer().render(data, renderer_context={'indent': 2})
        if path is None:
            self.stdout.write(content.decode('utf-8'))
            return
        with open(path, 'wb') as handle:
            handle.write(content + b'\n')

    def read_json(self, path):
        try:
            with open(path, 'rb') as handle:
                return JSONParser().parse(io.BytesIO(handle.read()))
        except OSError as exc:
            raise DataFormatError(f"cannot open {path}: {exc}")
        except ParseError as exc:
            raise DataFormatError(f"{path} is not valid JSON: {exc.detail}")
