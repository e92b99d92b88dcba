"""Builds tests/data/molecules_300.csv: 300 distinct small molecules made by
attaching substituents to common scaffolds, with RDKit-computed properties.

Run once; the output is committed under tests/data.
"""
import csv
import itertools
import sys

from rdkit import Chem
from rdkit.Chem import Crippen, Descriptors

SCAFFOLDS = {
    "benzene": "c1ccc({})cc1",
    "pyridine": "c1ccnc({})c1",
    "thiophene": "c1csc({})c1",
    "furan": "c1coc({})c1",
    "cyclohexane": "C1CCC({})CC1",
    "naphthalene": "c1ccc2cc({})ccc2c1",
    "piperidine": "C1CCN({})CC1",
    "chain": "CCC({})CC",
}
LINKERS = ["", "C", "CC", "O", "N", "C(=O)", "OC", "S"]
GROUPS = ["C", "O", "N", "F", "Cl", "Br", "C(F)(F)F", "C#N", "C(=O)O", "[N+](=O)[O-]", "OC", "C=C"]


def main(out_path):
    seen = set()
    rows = []
    for (series, scaffold), linker, group in itertools.product(SCAFFOLDS.items(), LINKERS, GROUPS):
        smiles = scaffold.format(linker + group)
        mol = Chem.MolFromSmiles(smiles)
        if mol is None:
            continue
        canonical = Chem.MolToSmiles(mol)
        if canonical in seen:
            continue
        seen.add(canonical)
        rows.append((series, canonical, mol))
    rows = rows[::max(1, len(rows) // 300)][:300]
    if len(rows) != 300:
        raise SystemExit(f"only {len(rows)} molecules")
    with open(out_path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "smiles", "series", "mass", "logp", "rings"])
        for n, (series, smiles, mol) in enumerate(rows):
            w.writerow([f"mol-{n:03d}", smiles, series, f"{Descriptors.MolWt(mol):.4f}",
                        f"{Crippen.MolLogP(mol):.4f}", mol.GetRingInfo().NumRings()])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/molecules_300.csv")
