"""Moore determinants: a hand-made matrix, the real-embedding cross-check and a congruence."""

import json
from pathlib import Path

import numpy as np

from quatpsh import HMatrix, moore_det, real_embedding
from quatpsh.hyperherm import conj_transform, is_positive_definite, signature_of_B
from quatpsh.quaternion import qconj_transpose, qmatmul

data = json.loads((Path(__file__).parent / "data" / "example_b.json").read_text())
a = HMatrix(np.asarray(data["entries"], dtype=float))
print("matrix [[5, 1+i+j+k], [1-i-j-k, 1]]")
print("  Moore determinant          ", moore_det(a))
print("  4th root of real det (4n x 4n)", np.linalg.det(real_embedding(a)) ** 0.25)
print("  positive definite?         ", is_positive_definite(a))

rng = np.random.default_rng(0)
c = rng.standard_normal((2, 2, 4))
lhs = moore_det(conj_transform(a, c))
rhs = moore_det(a) * moore_det(qmatmul(qconj_transpose(c), c))
print(f"congruence C* A C: {lhs:.12g} vs det A * det C*C = {rhs:.12g}")

print("signature of the mixed-discriminant form on 3x3 hyperhermitian matrices:")
pds = [HMatrix.random_pd(3, rng).entries]
print("  (positive, negative, zero) =", signature_of_B(pds, n=3))
