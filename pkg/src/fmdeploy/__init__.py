"""Deployment analysis over extended feature models.

Parse application and node models, declare hosting/colocation/separation
constraints and enumerate every valid deployment configuration.
"""

from .checker import Configuration, is_valid_configuration
from .deploy import (
    Colocated,
    DeploymentSpec,
    HostedBy,
    NodeDescriptor,
    NotHostedBy,
    Separated,
    check_spec_consistency,
    find_match,
    resource_verification,
)
from .dsl import parse_deployment_spec, parse_model, serialize_model, serialize_spec
from .errors import (
    BoundExceededError,
    FMDeployError,
    InconsistentSpecError,
    ParseError,
    UnknownReferenceError,
)
from .matcher import AugmentedModel, SolutionSet, augment, explain_infeasibility, possible_host
from .model import (
    DEFAULT_ONTOLOGY,
    Attribute,
    Cardinality,
    Feature,
    FeatureModel,
    ResourceOntology,
    validate_model,
)
from .oracle import brute_force_enumerate
from .solver import encode, enumerate_solutions

__version__ = "0.1.0"
