"""Adapter scripts feeding external model outputs into goldenbench corpora.

Each script is a one-shot batch job: it reads a corpus manifest plus audio
files, runs a model backend (or the offline stand-in), and writes manifest
lines, GSEB embedding files, or score fields in the exact formats the
goldenbench toolkit consumes.  The toolkit itself is never imported; the
file formats and its command line are the only contact surface.
"""

__version__ = "0.1.0"
