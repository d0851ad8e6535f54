"""Training-free rotor detection in event-camera streams.

The pipeline slices an event period, intersects positive and negative pixel
occupancy per slice, and accumulates the intersections into a saliency map.
Thresholded components are clustered, scored for blade-pass periodicity, and
refined with a Gaussian shape prior.
"""

from .detector import (
    Cluster,
    Detection,
    PipelineResult,
    cluster_regions,
    coarse_select,
    detect_period,
    gaussian_fine_refine,
    rect_min_distance,
    run_pipeline,
)
from .errors import (
    ConfigurationError,
    DegenerateInputError,
    EventFormatError,
    EvrotorError,
    ValidationError,
)
from .events import (
    NEGATIVE,
    POSITIVE,
    BBox,
    DetectorConfig,
    Event,
    EventPeriod,
    SensorGeometry,
)
from .features import (
    FeatureSeries,
    PointSet,
    PrincipalDirection,
    RegionScores,
    compute_features,
    density_series,
    dilated_window,
    direction_similarity,
    extract_local_slices,
    moving_average,
    peaks_valleys,
    periodicity_score,
    principal_direction,
    saliency_score,
    structural_similarity,
)
from .io import (
    AnnotationRecord,
    BoxRecord,
    load_annotations,
    load_events,
    write_annotation,
    write_detections,
    write_events,
    write_pgm,
)
from .metrics import (
    MetricsReport,
    average_precision,
    evaluate_dataset,
    evaluate_records,
    iou,
    match_detections,
    precision_recall_f1,
)
from .saliency import (
    PolaritySlicePair,
    Region,
    SaliencyMap,
    accumulate_saliency,
    connected_components,
    partition_polarity_slices,
    polarity_intersection,
    render_gray,
    saliency_map,
    slice_indices,
    threshold_mask,
)
from .synth import (
    BackgroundSpec,
    PropellerSpec,
    SynthScene,
    benchmark_period,
    generate_background_events,
    generate_propeller_events,
    generate_scene,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationRecord",
    "BBox",
    "BackgroundSpec",
    "BoxRecord",
    "Cluster",
    "ConfigurationError",
    "DegenerateInputError",
    "Detection",
    "DetectorConfig",
    "Event",
    "EventFormatError",
    "EventPeriod",
    "EvrotorError",
    "FeatureSeries",
    "MetricsReport",
    "NEGATIVE",
    "POSITIVE",
    "PipelineResult",
    "PointSet",
    "PolaritySlicePair",
    "PrincipalDirection",
    "PropellerSpec",
    "Region",
    "RegionScores",
    "SaliencyMap",
    "SensorGeometry",
    "SynthScene",
    "ValidationError",
    "accumulate_saliency",
    "average_precision",
    "benchmark_period",
    "cluster_regions",
    "coarse_select",
    "compute_features",
    "connected_components",
    "density_series",
    "detect_period",
    "dilated_window",
    "direction_similarity",
    "evaluate_dataset",
    "evaluate_records",
    "extract_local_slices",
    "gaussian_fine_refine",
    "generate_background_events",
    "generate_propeller_events",
    "generate_scene",
    "iou",
    "load_annotations",
    "load_events",
    "match_detections",
    "moving_average",
    "partition_polarity_slices",
    "peaks_valleys",
    "periodicity_score",
    "polarity_intersection",
    "precision_recall_f1",
    "principal_direction",
    "rect_min_distance",
    "render_gray",
    "run_pipeline",
    "saliency_map",
    "saliency_score",
    "slice_indices",
    "structural_similarity",
    "threshold_mask",
    "write_annotation",
    "write_detections",
    "write_events",
    "write_pgm",
]
