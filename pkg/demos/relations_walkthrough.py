"""Walk through one exchange relation that fails literally and passes after a twist.

    python demos/relations_walkthrough.py
"""
from elliptic_hopf.cartan import cartan_matrix
from elliptic_hopf.free_field import LITERAL, Conventions, contraction_product_form
from elliptic_hopf.lattice_series import Monomial
from elliptic_hopf.relations import CheckWindow, check_exchange, literal_pole_offset

A2 = cartan_matrix("A2")
cw = CheckWindow(3, 4)

# The contraction of two E currents on one node is a finite product.
d = contraction_product_form("E", "E", 0, 0, A2)
print("E_0(z) E_0(w) contraction:", d.form, "  zero mode:", d.zero_mode)

# EE holds with the literal shifts ...
print("EE literal:", check_exchange("EE", 0, 0, A2, cw).status)

# ... but H+ against E does not.  The report carries the first discrepant coefficient.
lit = check_exchange("H+E", 0, 0, A2, cw, LITERAL)
print("H+E literal:", lit.status, lit.witness)

# Twisting the momentum factor of E by -pq repairs it.
twisted = Conventions(e_twist=Monomial.of(-1, p=1, q=1))
print("H+E twisted:", check_exchange("H+E", 0, 0, A2, cw, twisted).status)

for off in literal_pole_offset(A2):
    print(f"[E,F] pole at {off['found']} instead of {off['expected']} (offset {off['offset']})")
