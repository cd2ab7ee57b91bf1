"""Tagged norm descriptions and their evaluation, shared by CLI and tests.

Spec strings:  Lp:2 (alias L2, Linf), SobolevIso:s, SobolevAniso:s,s',
HThetaR:theta,r, BesovIso:s,p,q, BesovAniso:s1,p,q1,s2,q2, BpEndpoint:p.
'inf' is accepted wherever an exponent may be infinite.
"""

from dataclasses import dataclass

import numpy as np

from .dyadic import aniso_besov_norm, besov_norm
from .errors import ParameterRangeError
from .grid import RealField, SpectralField, forward_transform, inverse_transform
from .spectral import (
    htheta_r_norm,
    lp_norm,
    sobolev_aniso_norm,
    sobolev_iso_norm,
    validate_htheta_params,
)

KINDS = {
    "Lp": 1,
    "SobolevIso": 1,
    "SobolevAniso": 2,
    "HThetaR": 2,
    "BesovIso": 3,
    "BesovAniso": 5,
    "BpEndpoint": 1,
}


@dataclass(frozen=True)
class NormSpec:
    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterRangeError("kind", self.kind, str(tuple(KINDS)))
        if len(self.params) != KINDS[self.kind]:
            raise ParameterRangeError(
                "params", self.params,
                f"{KINDS[self.kind]} parameters for {self.kind}",
            )
        if self.kind == "HThetaR":
            validate_htheta_params(*self.params)
        if self.kind == "BpEndpoint":
            p = self.params[0]
            if not (1.0 < p < np.inf):
                raise ParameterRangeError("p", p, "]1, inf[", "endpoint exponent")


def parse_norm_spec(text: str) -> NormSpec:
    text = text.strip()
    if text == "L2":
        return NormSpec("Lp", (2.0,))
    if text == "Linf":
        return NormSpec("Lp", (np.inf,))
    if ":" not in text:
        raise ParameterRangeError("spec", text, "KIND:param[,param...] or L2/Linf")
    kind, _, raw = text.partition(":")
    params = []
    for tok in raw.split(","):
        tok = tok.strip()
        params.append(np.inf if tok in ("inf", "Inf", "INF") else float(tok))
    return NormSpec(kind, tuple(params))


def evaluate_norm(spec: NormSpec, field) -> float:
    """Evaluate on a RealField or SpectralField, converting as needed."""
    if spec.kind == "Lp":
        if isinstance(field, SpectralField):
            field = inverse_transform(field)
        return lp_norm(field, spec.params[0])
    if isinstance(field, RealField):
        field = forward_transform(field)
    if spec.kind == "SobolevIso":
        return sobolev_iso_norm(field, spec.params[0])
    if spec.kind == "SobolevAniso":
        return sobolev_aniso_norm(field, *spec.params)
    if spec.kind == "HThetaR":
        return htheta_r_norm(field, *spec.params)
    if spec.kind == "BesovIso":
        return besov_norm(field, *spec.params)
    if spec.kind == "BesovAniso":
        s1, p, q1, s2, q2 = spec.params
        return aniso_besov_norm(field, s1, q1, s2, q2, p)
    # BpEndpoint(p) expands to BesovIso(-2 + 2/p, inf, inf)
    p = spec.params[0]
    return besov_norm(field, -2.0 + 2.0 / p, np.inf, np.inf)
