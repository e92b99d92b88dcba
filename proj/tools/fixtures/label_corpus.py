"""Labels the SMILES corpus with RDKit so the parser tests have an independent reference.

Run once; the output is committed under tests/data.
"""
import sys
from rdkit import Chem

MOLECULES = """
C CC CCC CC(C)C CCO OCCO CC(C)O CC(C)(C)O C=C C#C CC#N C=O CC=O CC(C)=O OC=O CC(=O)O CCC(=O)O
OC(=O)C(=O)O OC(=O)CC(=O)O OC(=O)CCC(=O)O COC C1CCOC1 C1COCCO1 OO COO CC(=O)OO CC(C)OO
CC(=O)OON(=O)=O CO[N+](=O)[O-] CCO[N+](=O)[O-] C[N+](=O)[O-] OCC(O[N+](=O)[O-])C
O=[N+]([O-])OCCO[N+](=O)[O-] CN CCN CN(C)C NCCO NC(=O)C c1ccccc1 Cc1ccccc1 Cc1ccccc1C Oc1ccccc1
Cc1ccccc1O Nc1ccccc1 O=Cc1ccccc1 OC(=O)c1ccccc1 O=[N+]([O-])c1ccccc1 Oc1ccc(cc1)[N+](=O)[O-]
c1ccc2ccccc2c1 c1ccc2cc3ccccc3cc2c1 c1ccncc1 c1cc[nH]c1 c1ccoc1 c1ccsc1 c1cnc[nH]1 Cc1ccco1
O=Cc1ccco1 COc1ccccc1 COc1cc(C=O)ccc1O C1CC1 C1CCCCC1 CC1CCCCC1 OC1CCCCC1 O=C1CCCCC1 C1=CCCCC1
CC1=CCC(CC1)C(C)=C CC(C)C1CCC(C)CC1O CC1=CCC2CC1C2(C)C CC1(C)C2CCC1(C)C(=O)C2 CC(=C)C=C C=CC=C
CC=CC=O C=CC(=O)O CC(=C)C(=O)OC OCC=O CC(=O)C=O O=CC=O OCC(O)CO FC(F)(F)F ClC(Cl)Cl CI ClC=C
FC(F)(Cl)Cl CS CSC CSSC CS(C)=O CS(=O)(=O)O OS(=O)(=O)O OP(=O)(O)O CCOP(=O)(OCC)OCC [NH4+]
[O-]C(=O)C C[Si](C)(C)C B(O)(O)O CC(=O)Nc1ccc(O)cc1 CC(C)Cc1ccc(cc1)C(C)C(=O)O
Cn1cnc2c1c(=O)n(C)c(=O)n2C OCC(O)C(O)C(O)C(O)C=O OC(=O)CC(O)(CC(=O)O)C(=O)O
""".split()


def label(smiles):
    mol = Chem.MolFromSmiles(smiles)
    if mol is None:
        raise SystemExit(f"rdkit rejected {smiles}")
    atoms = mol.GetNumAtoms()
    bonds = mol.GetNumBonds()
    aromatic = sum(1 for a in mol.GetAtoms() if a.GetIsAromatic())
    hydrogens = sum(a.GetTotalNumHs() for a in mol.GetAtoms())
    return atoms, bonds, aromatic, hydrogens


def main():
    if len(MOLECULES) != 100 or len(MOLECULES) != len(set(MOLECULES)):
        raise SystemExit("corpus must hold 100 distinct molecules")
    out = sys.stdout
    out.write("# smiles\tatoms\tbonds\taromatic_atoms\thydrogens\n")
    for s in MOLECULES:
        canon = Chem.MolToSmiles(Chem.MolFromSmiles(s))
        a, b, ar, h = label(canon)
        out.write(f"{canon}\t{a}\t{b}\t{ar}\t{h}\n")
    print(len(MOLECULES), file=sys.stderr)


if __name__ == "__main__":
    main()
