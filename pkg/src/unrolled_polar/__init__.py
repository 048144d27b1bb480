"""Fast-SSC polar decoding and unrolled pipeline modeling."""
from .codespec import CodeSpec, CodeSpecError, assemble_master, check_sibling_rates, construct, load_spec, save_spec
from .encoder import encode_nonsystematic, encode_systematic, polar_transform
from .fastssc import NodeConstraints, build_tree, fastssc_decode
from .quant import QuantSpec, quantize_channel
from .sc_ref import sc_decode
from .unroll import CostModel, apply_interval, compute_imax, estimate_cost, sram_convert, unroll

__version__ = "0.1.0"
