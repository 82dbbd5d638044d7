"""Instance/report serialization, seeded generators and the CLI entry point."""

from .formats import (InstanceParseError, parse_instance, report_text,
                      serialize_instance, write_report)
from .gen import GEN_KINDS, generate
from .main import main

__all__ = ["InstanceParseError", "parse_instance", "serialize_instance",
           "report_text", "write_report", "GEN_KINDS", "generate", "main"]
