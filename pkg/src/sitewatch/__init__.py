"""Construction-site presence decisions from per-frame detector and OCR output."""

from .config import PipelineConfig, load_config
from .engine import Decision, DecisionEngine, Pipeline, evaluate_frame, evaluate_stream
from .errors import (ConfigError, DesignError, ParseError, SitewatchError, StreamError,
                     UndefinedMetricError, ValidationError)
from .frames import (BoundingBox, Detection, FrameRecord, GroundTruth, TextObservation,
                     parse_frame_line, serialize_frame, stream_frames)
from .metrics import (ConfusionMatrix, DynamicMetrics, EvalPoint, StaticReport, cell_rate,
                      confusion, derive_metrics, grid_report, k_sweep)
from .signs import SignDictionary, SignMatch, dice_ngram, match_sign, normalize_text
from .sim import SimConfig, SiteProfile, Span, flip_noise, garble, gen_stream, truth_vector
from .vocab import (CategoryKind, EvidenceCounts, VocabularyConfig, apply_band, canonicalize,
                    dedup, default_vocabulary, iou, tally)
from .voter import MajorityVoter, smooth_stream

__version__ = "0.1.0"
