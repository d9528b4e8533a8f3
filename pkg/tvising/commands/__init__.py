from .generate import register as register_generate
from .fit import register as register_fit
from .select import register as register_select
from .evaluate import register as register_evaluate
from .experiment import register as register_experiment
from .ingest import register as register_ingest

__all__ = [
    "register_generate",
    "register_fit",
    "register_select",
    "register_evaluate",
    "register_experiment",
    "register_ingest",
]
