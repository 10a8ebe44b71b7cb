"""Class groups and unit groups of number fields by the factor-base method."""

__version__ = "0.1.0"

from .core_arith.field import NumberField, build_field  # noqa: E402
from .bounds import ProofLevel  # noqa: E402
from .class_sat import full_pipeline, PipelineConfig  # noqa: E402

__all__ = ["NumberField", "build_field", "ProofLevel", "full_pipeline", "PipelineConfig",
           "__version__"]
