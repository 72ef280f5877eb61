"""Self-supervised ECG representations from temporal and spatial reverse detection."""

__version__ = "0.1.0"

from .signal import EcgRecord, Label, Segment, SegmentSet, segment_records  # noqa: E402
from .transforms import PretextMode, spatial_reverse, temporal_reverse, ts_reverse  # noqa: E402

__all__ = [
    "__version__", "EcgRecord", "Label", "Segment", "SegmentSet", "segment_records",
    "PretextMode", "spatial_reverse", "temporal_reverse", "ts_reverse",
]
