"""Reference hashed-path fingerprints built on RDKit's molecular graph.

Writes the golden file (20 molecules) and the rewritten-SMILES pair corpus.
"""
import random
import sys
from rdkit import Chem

MAX_LEN = 7
N_BITS = 2048
FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211

GOLDEN = """
C CCO CC(=O)O c1ccccc1 Oc1ccccc1 CC(=O)OO[N+](=O)[O-] CO[N+](=O)[O-] c1cc[nH]c1 c1ccoc1 CC#N
OO CS(C)=O ClC(Cl)Cl C1CCCCC1 CC1=CCC(CC1)C(C)=C O=Cc1ccco1 NCCO FC(F)(F)F OP(=O)(O)O
CC(=O)Nc1ccc(O)cc1
""".split()

BOND = {Chem.BondType.SINGLE: "-", Chem.BondType.DOUBLE: "=", Chem.BondType.TRIPLE: "#",
        Chem.BondType.AROMATIC: ":"}


def fnv1a(text):
    h = FNV_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def label(atom):
    s = atom.GetSymbol()
    if atom.GetIsAromatic():
        s = s.lower()
    q = atom.GetFormalCharge()
    if q:
        s += ("+" if q > 0 else "-") + str(abs(q))
    return s


def serialize(mol, atoms):
    parts = [label(mol.GetAtomWithIdx(atoms[0]))]
    for a, b in zip(atoms, atoms[1:]):
        parts.append(BOND[mol.GetBondBetweenAtoms(a, b).GetBondType()])
        parts.append(label(mol.GetAtomWithIdx(b)))
    return "".join(parts)


def paths(mol):
    found = []

    def walk(path):
        fwd = serialize(mol, path)
        rev = serialize(mol, path[::-1])
        found.append(min(fwd, rev))
        if len(path) - 1 == MAX_LEN:
            return
        for nb in mol.GetAtomWithIdx(path[-1]).GetNeighbors():
            if nb.GetIdx() not in path:
                walk(path + [nb.GetIdx()])

    for a in mol.GetAtoms():
        walk([a.GetIdx()])
    return found


def bits(smiles):
    mol = Chem.MolFromSmiles(smiles)
    return sorted({fnv1a(p) & (N_BITS - 1) for p in paths(mol)})


def main(golden_path, rewrites_path):
    with open(golden_path, "w") as out:
        for s in GOLDEN:
            out.write(s + "\t" + ",".join(map(str, bits(s))) + "\n")

    corpus = [line.split("\t")[0] for line in open(sys.argv[3]) if not line.startswith("#")]
    rng = random.Random(7)
    pairs = []
    for s in corpus:
        mol = Chem.MolFromSmiles(s)
        if mol.GetNumAtoms() < 3:
            continue
        seen = set()
        for attempt in range(50):
            Chem.rdBase.SeedRandomNumberGenerator(rng.randrange(1 << 30))
            alt = Chem.MolToSmiles(mol, doRandom=True, canonical=False)
            if alt != s and alt not in seen and bits(alt) == bits(s):
                pairs.append((s, alt))
                break
            seen.add(alt)
        if len(pairs) == 50:
            break
    if len(pairs) != 50:
        raise SystemExit("not enough rewrite pairs")
    with open(rewrites_path, "w") as out:
        for a, b in pairs:
            out.write(f"{a}\t{b}\n")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
