"""Flat hypercomplex structure: the operators del and del_J on a polynomial potential."""

import numpy as np

from quatpsh.dirac import hessian
from quatpsh.fields import PolyField, norm_sq_field
from quatpsh.hypercomplex import Form, ddJ, del_, del_J, hkt_flat_check, is_real, t_map

rng = np.random.default_rng(5)
f = PolyField.random(2, 3, rng)
zero = Form.function(f)
eta = ddJ(f)
print("del del f = 0:              ", del_(del_(zero)).is_zero())
print("del del_J f = -del_J del f: ", (eta + del_J(del_(zero))).is_zero())
print("del del_J f is real:        ", is_real(eta))
pts = rng.standard_normal((5, 8))
dev = np.max(np.abs(t_map(eta)(pts) - 0.25 * hessian(f)(pts)))
print(f"t(del del_J f) - Hessian/4:  {dev:.2e}")

print("HKT check for |q|^2 on H^2: ", hkt_flat_check(norm_sq_field(2)))
