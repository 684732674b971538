"""System prompt rendering from the versioned template asset."""
from __future__ import annotations

import hashlib
from functools import lru_cache
from importlib import resources

from ..ir.features import FeatureVector, serialize_features

PROMPT_TEMPLATE_VERSION = 1
PLACEHOLDERS = ("formatted_features", "TotalInsts", "program_id")


class TemplateError(ValueError):
    pass


@lru_cache(maxsize=None)
def load_template() -> str:
    return resources.files("aware_opt.data").joinpath("prompt_template.txt").read_text()


def template_digest(template: str | None = None) -> str:
    return hashlib.sha256((template or load_template()).encode()).hexdigest()[:16]


def render_prompt(fv: FeatureVector, total_insts: int, program_id: str, template: str | None = None) -> str:
    template = load_template() if template is None else template
    for name in PLACEHOLDERS:
        if "{" + name + "}" not in template:
            raise TemplateError(f"template is missing the {{{name}}} placeholder")
    if total_insts != fv[51]:
        raise ValueError(f"total_insts={total_insts} disagrees with TotalInsts feature {fv[51]}")
    try:
        return template.format(
            formatted_features=serialize_features(fv), TotalInsts=total_insts, program_id=program_id
        )
    except (KeyError, IndexError) as exc:
        raise TemplateError(f"unknown placeholder in template: {exc}") from None
