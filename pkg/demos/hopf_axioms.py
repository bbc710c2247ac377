"""Print both sides of the Hopf-family axioms for the E current."""
from elliptic_hopf.hopf_family import check_axiom, iterated_coproduct

for axiom in ("a1", "a2", "a3"):
    for conv in ("charge", "numeric"):
        rep = check_axiom(axiom, "E", conv)
        print(f"({axiom}) under the {conv} convention: {rep.status}")
        for variant, sides in rep.sides.items():
            tag = f" [{variant}]" if variant else ""
            print(f"  lhs{tag}: " + "  +  ".join(sides["lhs"]))
            print(f"  rhs{tag}: " + "  +  ".join(sides["rhs"]))
        if rep.witness:
            print("  left over:", rep.witness["non_cancelling_terms"])
    print()

it = iterated_coproduct(1, 2)
print(f"iterated coproduct, m = 2: {it.status} over {it.orders_compared} split orders, "
      f"central charge {it.central_charge}")
