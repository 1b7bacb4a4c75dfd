#!/usr/bin/env python3
"""Fetch the benchmark MaxCut instances used by the acceptance suite.

The instance files are small public text files served by the Biq Mac
library.  This build environment has no network access, so they are not
vendored; run this script on a connected machine to place them under
tests/data/biqmac/.  Downloaded files are structurally validated (vertex and
edge counts) and their SHA-256 digests are recorded next to them.
"""

from __future__ import annotations

import hashlib
import sys
import urllib.request
from pathlib import Path

DEST = Path(__file__).resolve().parent.parent / "tests" / "data" / "biqmac"

MIRRORS = [
    "https://biqmac.aau.at/library/mac/rudy/{name}",
    "http://biqmac.uni-klu.ac.at/library/mac/rudy/{name}",
]

# name -> (vertices, edges) declared by the library
INSTANCES = {
    "pm1s_80.0": (80, 316),
    "pm1s_80.1": (80, 316),
    "pm1s_80.3": (80, 316),
    "g05_60.0": (60, 885),
}


def validate(text: str, name: str) -> None:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    nv, ne = map(int, lines[0].split())
    want_nv, want_ne = INSTANCES[name]
    if (nv, ne) != (want_nv, want_ne):
        raise ValueError(f"{name}: header says {nv} {ne}, expected {want_nv} {want_ne}")
    if len(lines) - 1 != ne:
        raise ValueError(f"{name}: {len(lines) - 1} edge lines for declared {ne}")


def fetch(name: str) -> bool:
    for mirror in MIRRORS:
        url = mirror.format(name=name)
        try:
            with urllib.request.urlopen(url, timeout=30) as resp:
                text = resp.read().decode()
            validate(text, name)
        except Exception as exc:  # try the next mirror
            print(f"  {url}: {exc}")
            continue
        path = DEST / name
        path.write_text(text)
        digest = hashlib.sha256(text.encode()).hexdigest()
        print(f"  saved {path} sha256={digest}")
        return True
    return False


def main() -> int:
    DEST.mkdir(parents=True, exist_ok=True)
    digests = {}
    ok = True
    for name in INSTANCES:
        print(f"fetching {name} ...")
        if fetch(name):
            digests[name] = hashlib.sha256((DEST / name).read_bytes()).hexdigest()
        else:
            ok = False
            print(f"  FAILED: {name}")
    if digests:
        with open(DEST / "SHA256SUMS", "w") as fh:
            for name, digest in sorted(digests.items()):
                fh.write(f"{digest}  {name}\n")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
