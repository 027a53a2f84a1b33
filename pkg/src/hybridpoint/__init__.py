"""Hybrid fisheye/perspective camera geometry and keypoint evaluation toolkit."""

from .backend import active_backend
from .camera import (
    FisheyeModel,
    PinholeModel,
    fisheye_project,
    fisheye_unproject,
    load_calibration,
    pinhole_project,
    pinhole_unproject,
    save_calibration,
)
from .homography import (
    Homography,
    HomographyParams,
    HybridMap,
    SamplingRanges,
    compose,
    factor,
    hybrid_forward,
    hybrid_inverse,
    sample,
)
from .keypoints import KeypointSet, MatchSet
from .detect import (
    DetectorConfig,
    baseline_detect,
    decode_detections,
    encode_labels,
    homographic_adaptation,
    pseudo_label,
)
from .descmatch import baseline_describe, interpolate_descriptors, match_nn
from .losses import LossConfig, descriptor_pair_loss, detection_loss, detection_loss_total, total_loss
from .metrics import EvalConfig, MetricsReport, mean_matching_score, repeatability
from .benchmark import run_benchmark
from .synthdata import LabeledImage, PrimitiveScene, augment, gen_primitive_image
from .warp import (
    CubeMap,
    cubemap_to_fisheye,
    synthesize_perspective,
    transfer_keypoints,
    warp_perspective,
)

__version__ = "0.1.0"
