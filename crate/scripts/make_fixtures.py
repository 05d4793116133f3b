"""Regenerate the frozen test fixtures under crates/core/tests/data.

RDKit is used here only as an independent reference: the Rust code never
links against it. Re-running this script with a different RDKit release
may change random spellings but not the reference values.
"""
import os
import random
import sys

from rdkit import Chem, RDConfig, RDLogger
from rdkit.Chem import BRICS, Descriptors, rdMolDescriptors
from rdkit.Chem.SaltRemover import SaltRemover  # noqa: F401

RDLogger.DisableLog("rdApp.*")
OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "data")
ALLOWED = {"C", "N", "O", "S", "P", "F", "Cl", "Br", "I", "B"}


def read_smi(path, smiles_col):
    out = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if len(parts) <= smiles_col:
                continue
            out.append(parts[smiles_col])
    return out


def clean(smi):
    m = Chem.MolFromSmiles(smi)
    if m is None:
        return None
    frags = Chem.GetMolFrags(m, asMols=True)
    m = max(frags, key=lambda f: f.GetNumHeavyAtoms())
    if any(a.GetSymbol() not in ALLOWED for a in m.GetAtoms()):
        return None
    if any(a.GetNumRadicalElectrons() for a in m.GetAtoms()):
        return None
    if not 5 <= m.GetNumHeavyAtoms() <= 70:
        return None
    return Chem.MolToSmiles(m)


def single_brics(m):
    out = []
    for (a, b), (la, lb) in BRICS.FindBRICSBonds(m):
        bond = m.GetBondBetweenAtoms(a, b)
        if bond.GetBondType() != Chem.BondType.SINGLE:
            continue
        out.append((min(a, b), max(a, b)))
    return sorted(set(out))


def rotatable(m):
    n = 0
    for b in m.GetBonds():
        if b.GetBondType() != Chem.BondType.SINGLE or b.IsInRing():
            continue
        a1, a2 = b.GetBeginAtom(), b.GetEndAtom()
        if a1.GetDegree() < 2 or a2.GetDegree() < 2:
            continue
        amide = False
        for c, x in ((a1, a2), (a2, a1)):
            if c.GetSymbol() == "C" and x.GetSymbol() == "N":
                for nb in c.GetBonds():
                    o = nb.GetOtherAtom(c)
                    if o.GetSymbol() == "O" and nb.GetBondType() == Chem.BondType.DOUBLE:
                        amide = True
        if not amide:
            n += 1
    return n


def reference_row(smi, rng):
    m = Chem.MolFromSmiles(smi)
    hbd = sum(1 for a in m.GetAtoms() if a.GetSymbol() in ("N", "O") and a.GetTotalNumHs() > 0)
    hba = sum(1 for a in m.GetAtoms() if a.GetSymbol() in ("N", "O"))
    bonds = ";".join(f"{a}-{b}" for a, b in single_brics(m))
    spellings = set()
    for _ in range(12):
        spellings.add(Chem.MolToSmiles(m, canonical=False, doRandom=True, isomericSmiles=False))
        if len(spellings) >= 3:
            break
    kek = Chem.Mol(m)
    Chem.Kekulize(kek, clearAromaticFlags=True)
    kekule = Chem.MolToSmiles(kek, kekuleSmiles=True, isomericSmiles=False, doRandom=True, canonical=False)
    return [
        smi,
        str(m.GetNumHeavyAtoms()),
        f"{Descriptors.MolWt(m):.4f}",
        str(hbd),
        str(hba),
        str(rotatable(m)),
        str(rdMolDescriptors.CalcNumAromaticRings(m)),
        bonds,
        " ".join(sorted(spellings)),
        kekule,
    ]


def main():
    rng = random.Random(20240501)
    random.seed(20240501)
    contrib = RDConfig.RDContribDir
    chembl = []
    chembl += read_smi(os.path.join(contrib, "fraggle", "data", "ChEMBL_11265_actives.smi"), 0)
    chembl += read_smi(os.path.join(contrib, "Fastcluster", "cdk2.smi"), 1)
    chembl += read_smi(os.path.join(contrib, "FreeWilson", "data", "CHEMBL2321810.smi"), 0)
    nci = read_smi(os.path.join(RDConfig.RDDataDir, "NCI", "first_5K.smi"), 0)

    seen = set()
    druglike = []
    for smi in chembl + nci:
        c = clean(smi)
        if c is None or c in seen:
            continue
        m = Chem.MolFromSmiles(c)
        mw = Descriptors.MolWt(m)
        if smi in chembl or 180 <= mw <= 600:
            seen.add(c)
            druglike.append(c)
    druglike = druglike[:1500]

    with open(os.path.join(OUT, "druglike.smi"), "w") as fh:
        fh.write("# drug-like test corpus (ChEMBL and NCI subsets, largest fragment)\n")
        for i, s in enumerate(druglike):
            fh.write(f"{s}\tmol{i:04d}\n")

    with open(os.path.join(OUT, "druglike_reference.tsv"), "w") as fh:
        fh.write("# smiles\theavy\tmw\thbd\thba\trotb\tarom_rings\tbrics_single_bonds\trandom_spellings\tkekule_spelling\n")
        for s in druglike:
            fh.write("\t".join(reference_row(s, rng)) + "\n")

    every = []
    seen2 = set()
    for smi in chembl + nci:
        c = clean(smi)
        if c is None or c in seen2:
            continue
        seen2.add(c)
        every.append(c)
    corpus = list(every)
    i = 0
    while len(corpus) < 10000:
        m = Chem.MolFromSmiles(every[i % len(every)])
        corpus.append(Chem.MolToSmiles(m, canonical=False, doRandom=True))
        i += 1
    with open(os.path.join(OUT, "corpus_10k.smi"), "w") as fh:
        for s in corpus[:10000]:
            fh.write(s + "\n")
    print(len(druglike), len(every), file=sys.stderr)


if __name__ == "__main__":
    main()
