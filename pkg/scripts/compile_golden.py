"""Print the listings for the two reference programs in every profile that accepts them."""
import sys
from pathlib import Path

from cgc.diagnostics import CompileError
from cgc.pipeline import CompileOptions, compile_source

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
PROGRAMS = [("simple_transform.cg", "simpleTransform", ("vs_1_1", "arbvp1")),
            ("bright_light_map_decal.cg", "brightLightMapDecal", ("arbfp1", "vs_1_1"))]


def main() -> int:
    for name, entry, profiles in PROGRAMS:
        text = (CORPUS / name).read_text()
        for profile in profiles:
            print(f"== {entry} / {profile}")
            try:
                comp = compile_source(text, CompileOptions(entry, profile), name)
            except CompileError as exc:
                print("\n".join(d.format() for d in exc.diagnostics))
                continue
            print(comp.text, end="")
            counts = ", ".join(f"{op}x{n}" for op, n in sorted(comp.listing.opcode_counts().items()))
            print(f"-- {comp.listing.instruction_count} instructions ({counts}), temps {comp.listing.temps}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
