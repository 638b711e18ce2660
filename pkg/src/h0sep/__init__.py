"""Class separability of point clouds from H0 persistence of the Vietoris-Rips filtration."""

from .errors import H0SepError, MissingLabelsError, ShapeMismatchError, SnapshotFormatError
from .geometry import DistanceMatrix, PointCloud, diameter, pairwise_distances
from .homology import (
    NormalizedPersistences,
    PersistenceDiagram,
    h0_normalized,
    h0_persistence,
    h0_persistence_oracle,
    normalize_diagram,
)
from .learners import auc_binary, auc_ovo, kmeans, knn_indices, softmax_fit
from .metrics import MetricReport, calinski_harabasz, normalize_series, roc_auc_n, thornton_index
from .summaries import (
    Density,
    StatisticSeries,
    density_distance,
    detect_convergence,
    persistence_density,
    persistence_statistic,
)
from .synth import SynthConfig, make_classification

__version__ = "0.1.0"
