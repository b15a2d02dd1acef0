"""Skin segmentation with a 7 x 7 majority filter, modelled twice: as a
whole-frame reference and as a cycle-accurate line-buffer pipeline."""
from .color_space import (
    Rgb444Pixel,
    ThresholdConfig,
    YuvPixel,
    classify_skin,
    rgb_to_yuv,
    threshold_frame,
    yuv_to_rgb,
)
from .frames import BitFrame
from .golden import majority_erode, reference_pipeline
from .window_pipeline import (
    LineFifo,
    PipelineGeometry,
    WindowPipeline,
    make_pipeline,
    operator_output,
    run_frame,
    window_sum,
)

__version__ = "0.1.0"
