"""Federated-learning round scheduling over LEO satellite constellations."""

__version__ = "0.1.0"

from .constellation import (  # noqa: E402
    ConstellationConfig,
    GroundSite,
    SatelliteElement,
    build_snapshot,
    build_temporal_graph,
    make_site,
    propagate,
    visible,
    walker_delta,
)
from .errors import (  # noqa: E402
    EmptyPathError,
    FedSchedError,
    MissingPolicyError,
    NoRouteError,
    OutOfHorizonError,
    ScenarioError,
    TooManyClientsError,
    TransmissionOverrunWarning,
    UnknownClientError,
    WindowOverrunError,
    ZeroBandwidthError,
)
from .fairness import max_min_rates  # noqa: E402
from .fl_task import (  # noqa: E402
    Client,
    FLTask,
    ModelSpec,
    model_catalog,
    training_time,
    transmission_time,
    with_training_jitter,
)
from .scheduler import (  # noqa: E402
    ChannelModel,
    PhaseInterval,
    Policy,
    RoundSchedule,
    ScheduleOptions,
    oracle_schedule,
    schedule,
    schedule_multiplexed,
    schedule_on_demand,
)
from .temporal_graph import (  # noqa: E402
    Edge,
    RoutePath,
    SnapshotGraph,
    TemporalGraph,
    bottleneck,
    snapshot_at,
    static_temporal_graph,
    widest_path,
)
from .validation import Violation, validate  # noqa: E402
