"""Short LDPC code design by genetic optimisation with the BP decoder in the loop."""

from .channels import ChannelSpec, LlrFrame, transmit, uncoded_ber
from .codes import (
    AlistError,
    CodeProfile,
    ParityCheckMatrix,
    StructureTemplate,
    apply_template,
    gf2_rank,
    girth_and_cycles,
    profile,
    random_regular,
    read_alist,
    write_alist,
)
from .decoder import DecodeOutcome, DecoderConfig, decode, syndrome
from .evaluation import EvalReport, StoppingRule, evaluate, fitness, sweep

__version__ = "0.1.0"
