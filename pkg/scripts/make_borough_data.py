"""Regenerate the synthetic borough table shipped in src/bdml/data."""

from pathlib import Path

from bdml.boroughs import write_synthetic


def main():
    out = Path(__file__).resolve().parents[1] / "src" / "bdml" / "data" / "synthetic_boroughs.csv"
    write_synthetic(out)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
