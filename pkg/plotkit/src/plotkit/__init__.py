"""Figure companion for thinfilmlab output directories.

Read-only: every number on a figure comes from an input file; nothing is
recomputed.  All rendering is deterministic (fixed style, hashed SVG ids,
no timestamps), so re-rendering the same inputs reproduces the output
byte for byte.
"""

__version__ = "0.1.0"

SCHEMA_VERSION = "1"
