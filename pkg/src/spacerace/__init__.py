"""Team quiz-race game: authoritative server, wire protocol, and bot harness."""

__version__ = "0.1.0"
