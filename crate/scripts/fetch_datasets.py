#!/usr/bin/env python3
"""Extract Cora, Citeseer and Pubmed edge lists from the `pgl` wheel on PyPI.

Writes 0-indexed, whitespace-separated "u v" edge lists to data/<name>.edges
and prints node count plus symmetrized/deduplicated nnz for each dataset.
The nnz figure is computed with a plain set-based pass, independent of the
Rust loader, and is what the loader tests compare against.
"""
import collections
import glob
import os
import pickle
import subprocess
import sys
import tempfile
import zipfile

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")
PLANETOID_NODES = {"citeseer": 3327, "pubmed": 19717}


def fetch_wheel(tmp):
    subprocess.check_call(
        [sys.executable, "-m", "pip", "download", "--no-deps", "pgl==2.2.6", "-d", tmp],
        stdout=subprocess.DEVNULL,
    )
    return glob.glob(os.path.join(tmp, "pgl-*.whl"))[0]


def stats(n, edges):
    s = set()
    for u, v in edges:
        if u != v:
            s.add((u, v))
            s.add((v, u))
    return n, len(s)


def write(name, n, edges):
    path = os.path.join(OUT, f"{name}.edges")
    with open(path, "w") as f:
        f.write(f"# {name}: {n} nodes\n")
        for u, v in edges:
            f.write(f"{u} {v}\n")
    n, nnz = stats(n, edges)
    print(f"{name}: num_nodes={n} nnz={nnz} raw_lines={len(edges)}")


def main():
    os.makedirs(OUT, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        whl = zipfile.ZipFile(fetch_wheel(tmp))

        content = whl.read("pgl/data/cora/cora.content").decode().splitlines()
        ids = {line.split("\t")[0]: i for i, line in enumerate(content)}
        edges = []
        for line in whl.read("pgl/data/cora/cora.cites").decode().splitlines():
            if line.strip():
                a, b = line.split()
                edges.append((ids[a], ids[b]))
        write("cora", len(ids), edges)

        for name, n in PLANETOID_NODES.items():
            raw = whl.read(f"pgl/data/{name}/ind.{name}.graph")
            graph = pickle.loads(raw, encoding="latin1")
            edges = []
            for u in sorted(graph):
                for v in graph[u]:
                    edges.append((int(u), int(v)))
            assert max(max(e) for e in edges) < n
            write(name, n, edges)


if __name__ == "__main__":
    main()
