"""
CocycleSuite - antisymmetry, cocycle identity and the T adjoint relation
"""
from typing import List

from .verification_suite import CheckResult, VerificationSuite, relative
from ..models.extension import CocycleParams
from ..utils.central_extension import roger_cocycle, t_operator, vector_field_bracket
from ..utils.torus_spectral import l2_inner, random_velocity


class CocycleSuite(VerificationSuite):
    """Properties of ω_α on random Hamiltonian fields"""

    def __init__(self, seed: int = 0, n: int = 64, kmax: int = 8, beta: float = 1.0,
                 triples: int = 50, pairs: int = 100):
        super().__init__(seed)
        self.n = n
        self.kmax = kmax
        self.params = CocycleParams(beta=beta)
        self.triples = triples
        self.pairs = pairs

    def get_name(self) -> str:
        return "cocycle"

    def get_description(self) -> str:
        return "Roger cocycle: antisymmetry, cocycle identity, <Tu,v> = omega(u,v)"

    def run_checks(self) -> List[CheckResult]:
        rng = self.rng()
        p = self.params
        antisym = 0.0
        identity = 0.0
        for _ in range(self.triples):
            u, v, w = (random_velocity(self.n, self.kmax, rng, amplitude=0.1) for _ in range(3))
            w_uv = roger_cocycle(u, v, p)
            antisym = max(antisym, abs(w_uv + roger_cocycle(v, u, p)))
            terms = [roger_cocycle(vector_field_bracket(u, v), w, p),
                     roger_cocycle(vector_field_bracket(v, w), u, p),
                     roger_cocycle(vector_field_bracket(w, u), v, p)]
            identity = max(identity, relative(abs(sum(terms)), max(abs(t) for t in terms)))

        adjoint = 0.0
        quadrature = 0.0
        for _ in range(self.pairs):
            u, v = (random_velocity(self.n, self.kmax, rng, amplitude=0.1) for _ in range(2))
            w_uv = roger_cocycle(u, v, p)
            adjoint = max(adjoint, relative(abs(l2_inner(t_operator(u, p), v) - w_uv), abs(w_uv)))
            quadrature = max(quadrature,
                             relative(abs(roger_cocycle(u, v, p, method="quadrature") - w_uv), abs(w_uv)))

        return [
            CheckResult.at_most("antisymmetry", antisym, 1e-12),
            CheckResult.at_most("cocycle_identity", identity, 1e-9),
            CheckResult.at_most("t_adjoint", adjoint, 1e-10),
            CheckResult.at_most("quadrature_vs_spectral", quadrature, 1e-10),
        ]
