"""Reference consumer for .dsa patch-sequence files."""

from .model import EmbeddedSequence, ForwardResult, ToyTransformer
from .report import AdaptivityResult, ImageMismatchError, adaptivity_report
from .rollout import pixel_attention_map, rollout_class_attribution
from .seqreader import ParsedSequence, SequenceReadError, read_sequence, read_sequence_file

__version__ = "0.1.0"
