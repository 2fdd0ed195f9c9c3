"""Regenerate the pinned regression fixtures under tests/fixtures/.

Deletes the pinned coverage-duel values and reruns the computation that the
release-gate test uses, so the fixture always matches the code path it
guards. Run after any intentional change to solver defaults or presets,
then review the diff before committing it.
"""
import argparse
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--keep-existing", action="store_true",
                    help="only create missing fixtures, never overwrite")
    args = ap.parse_args()

    from test_acceptance import _coverage_duel

    from gridfence.synth import preset

    fix = ROOT / "tests" / "fixtures" / "dominance.json"
    if fix.exists() and args.keep_existing:
        print(f"kept {fix}")
        return 0
    doc = _coverage_duel(preset("data1"))
    fix.parent.mkdir(parents=True, exist_ok=True)
    fix.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    print(f"wrote {fix}")
    print(f"  discrete upcr_mean {doc['discrete']['upcr_mean']:.6f} "
          f"({doc['discrete']['n_selected']} cells)")
    print(f"  circular upcr_mean {doc['circular']['upcr_mean']:.6f} "
          f"(r {doc['circular']['r']:.4f})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
