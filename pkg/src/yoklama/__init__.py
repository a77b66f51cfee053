"""Camera-to-ledger class attendance pipeline.

Frames from a directory replay are scanned for faces with a HOG
sliding-window detector, detected faces are identified against an enrolled
gallery by embedding distance, and per-session presence is written out as
an attendance CSV.  A small benchmark harness compares detector backends.
"""

from yoklama.image_io import (
    DecodeError,
    GrayImage,
    ImagePyramid,
    RgbImage,
    build_pyramid,
    decode_image,
    encode_image,
    resize_bilinear,
    to_grayscale,
)
from yoklama.hog import HogConfig, HogDescriptor, compute_gradients, hog_descriptor
from yoklama.detector import (
    DetectParams,
    Detection,
    LinearModel,
    detect,
    iou,
    nms,
    score_window,
    train_linear,
)
from yoklama.gallery import (
    FaceEmbedding,
    FaceRecord,
    Gallery,
    Identified,
    Unknown,
    encode_face,
    load_gallery,
    match_face,
)
from yoklama.attendance import AttendanceLedger, Roster, run_session
from yoklama.bench import BenchReport, emit_report, run_bench

__version__ = "0.1.0"
