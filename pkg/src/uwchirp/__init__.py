"""uwchirp: chirp-spread-spectrum acoustic PHY with a multipath-aware
receiver and non-binary LDPC coding, plus a Monte-Carlo experiment
harness."""

__version__ = "0.1.0"

from .channel import (
    ChannelProfile,
    ChannelTap,
    apply_channel,
    load_profile,
    random_profile,
    save_profile,
)
from .chirp import (
    CHIRP_KINDS,
    LINEAR,
    QUADRATIC,
    ChirpConfig,
    FrameLayout,
    base_chirp,
    modulate_frame,
    modulate_symbol,
    symbol_waveforms,
)
from .errors import (
    CodeConstructionError,
    DetectionError,
    ProfileFormatError,
    TruncatedFrameError,
    UwChirpError,
)
from .gfield import DEFAULT_PRIMITIVE_POLY, GaloisField
from .iqio import IqBuffer, read_iq, read_passband, write_iq, write_passband
from .passband import from_passband, to_passband
from .receiver import (
    DEFAULT_LLR_SCALE,
    DemodOutput,
    PathEstimate,
    combine_paths,
    dechirp_window,
    demodulate_frame,
    demodulate_paths,
    detect_packet,
    detect_paths,
    peak_list,
    spectrum_to_llr,
)
