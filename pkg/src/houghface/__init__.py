"""Face identification from Hough peaks of significant blocks in binary gradient maps."""

from .blocks import Block, BlockSet, SummedAreaTable, build_sat, select_significant_blocks, white_fraction
from .descriptor import (FaceDescriptor, PipelineConfig, extract_descriptor, read_descriptor,
                         write_descriptor)
from .harness import ConfusionCounts, evaluate, load_manifest, metrics
from .hough import HoughConfig, Peak, hough_transform, peak_centroid, select_nearest_two, top_peaks
from .imageops import binary_threshold, dilate_linear, gradient_8dir, normalize_input
from .matcher import Gallery, block_gate, chi_square, classify, dissimilarity

__version__ = "0.1.0"
