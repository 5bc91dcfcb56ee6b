"""vvcbox: VVC systems-layer toolbox.

Elementary-stream parsing, MP4 and MPEG2-TS packaging, DASH/HLS
segmenting and a live HTTP origin. Encoding and decoding stay outside;
this package moves bits between containers without touching pixels.
"""

__version__ = "0.1.0"

from .au import AccessUnit, assemble_access_units, assign_timing
from .errors import VvcBoxError
from .nal import (NalHeader, NalUnit, insert_emulation_prevention,
                  remove_emulation_prevention, scan_annex_b)
from .probe import ContainerKind, probe_bytes, probe_file
from .sps import SpsSummary, parse_sps_summary

__all__ = [
    "AccessUnit",
    "ContainerKind",
    "NalHeader",
    "NalUnit",
    "SpsSummary",
    "VvcBoxError",
    "__version__",
    "assemble_access_units",
    "assign_timing",
    "insert_emulation_prevention",
    "parse_sps_summary",
    "probe_bytes",
    "probe_file",
    "remove_emulation_prevention",
    "scan_annex_b",
]
