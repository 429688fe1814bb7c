"""Mapper graphs over county-level spatiotemporal and demographic tables."""

__version__ = "0.1.0"

from .analyze import (
    CalibrationResult,
    ComponentPartition,
    CycleReport,
    Flare,
    FlareReport,
    calibrate,
    connected_components,
    cycle_basis,
    detect_flares,
    two_core,
)
from .cluster import ClusterLabeling, ClusterParams, cluster_preimages, dbscan, default_eps
from .config import RunConfig, load_config, validate_config
from .cover import (
    CoverElement,
    CoverParams,
    CubicalCover,
    FilterSpec,
    Interval,
    fit_cover,
    interval_grid,
    preimage,
)
from .errors import (
    CalibrationError,
    ConfigError,
    CoverError,
    DataError,
    DiffError,
    GraphError,
    InputError,
    MapperScopeError,
)
from .ingest import (
    MonthlySeries,
    PointTable,
    RegionKey,
    RowMeta,
    YearlySeries,
    build_demographic_table,
    build_spatiotemporal_table,
    cumulative,
    load_centroids,
    load_deaths,
    load_demographics,
    load_population,
    month_index,
    monthly_to_yearly_mean,
)
from .layout import Embedding3D, LayoutConfig, component_spread, embed_3d
from .nerve import (
    ColorMap,
    CompositionReport,
    MapperEdge,
    MapperGraph,
    MapperNode,
    build_mapper,
    color_by,
    node_composition,
)
