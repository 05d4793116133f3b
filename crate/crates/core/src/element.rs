//! Periodic table data: symbols, standard atomic weights and the valence
//! model used for implicit hydrogens and sanitization.

use core::fmt;

/// Symbol and standard atomic weight, indexed by `atomic number - 1`.
const TABLE: [(&str, f64); 118] = [
    ("H", 1.0080), ("He", 4.0030), ("Li", 6.9410), ("Be", 9.0120), ("B", 10.8120), ("C", 12.0110),
    ("N", 14.0070), ("O", 15.9990), ("F", 18.9980), ("Ne", 20.1800), ("Na", 22.9900), ("Mg", 24.3050),
    ("Al", 26.9820), ("Si", 28.0860), ("P", 30.9740), ("S", 32.0670), ("Cl", 35.4530), ("Ar", 39.9480),
    ("K", 39.0980), ("Ca", 40.0780), ("Sc", 44.9560), ("Ti", 47.8670), ("V", 50.9440), ("Cr", 51.9960),
    ("Mn", 54.9380), ("Fe", 55.8450), ("Co", 58.9330), ("Ni", 58.6930), ("Cu", 63.5460), ("Zn", 65.3900),
    ("Ga", 69.7230), ("Ge", 72.6100), ("As", 74.9220), ("Se", 78.9600), ("Br", 79.9040), ("Kr", 83.8000),
    ("Rb", 85.4680), ("Sr", 87.6200), ("Y", 88.9060), ("Zr", 91.2240), ("Nb", 92.9060), ("Mo", 95.9400),
    ("Tc", 98.0000), ("Ru", 101.0700), ("Rh", 102.9060), ("Pd", 106.4200), ("Ag", 107.8680), ("Cd", 112.4120),
    ("In", 114.8180), ("Sn", 118.7110), ("Sb", 121.7600), ("Te", 127.6000), ("I", 126.9040), ("Xe", 131.2900),
    ("Cs", 132.9050), ("Ba", 137.3280), ("La", 138.9060), ("Ce", 140.1160), ("Pr", 140.9080), ("Nd", 144.2400),
    ("Pm", 145.0000), ("Sm", 150.3600), ("Eu", 151.9640), ("Gd", 157.2500), ("Tb", 158.9250), ("Dy", 162.5000),
    ("Ho", 164.9300), ("Er", 167.2600), ("Tm", 168.9340), ("Yb", 173.0400), ("Lu", 174.9670), ("Hf", 178.4900),
    ("Ta", 180.9480), ("W", 183.8400), ("Re", 186.2070), ("Os", 190.2300), ("Ir", 192.2170), ("Pt", 195.0780),
    ("Au", 196.9670), ("Hg", 200.5900), ("Tl", 204.3830), ("Pb", 207.2000), ("Bi", 208.9800), ("Po", 209.0000),
    ("At", 210.0000), ("Rn", 222.0000), ("Fr", 223.0000), ("Ra", 226.0000), ("Ac", 227.0000), ("Th", 232.0380),
    ("Pa", 231.0360), ("U", 238.0290), ("Np", 237.0000), ("Pu", 244.0000), ("Am", 243.0000), ("Cm", 247.0000),
    ("Bk", 247.0000), ("Cf", 251.0000), ("Es", 252.0000), ("Fm", 257.0000), ("Md", 258.0000), ("No", 259.0000),
    ("Lr", 262.0000), ("Rf", 267.0000), ("Db", 268.0000), ("Sg", 269.0000), ("Bh", 270.0000), ("Hs", 269.0000),
    ("Mt", 278.0000), ("Ds", 281.0000), ("Rg", 281.0000), ("Cn", 285.0000), ("Nh", 284.0000), ("Fl", 289.0000),
    ("Mc", 288.0000), ("Lv", 293.0000), ("Ts", 292.0000), ("Og", 294.0000),
];

/// Mass used for implicit hydrogens.
pub const HYDROGEN_MASS: f64 = 1.008;

/// A chemical element, or the `*` wildcard (atomic number 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(u8);

impl Element {
    pub const WILDCARD: Element = Element(0);
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const BR: Element = Element(35);
    pub const I: Element = Element(53);

    pub fn from_atomic_number(z: u8) -> Option<Element> {
        if (z as usize) <= TABLE.len() {
            Some(Element(z))
        } else {
            None
        }
    }

    /// Case-sensitive symbol lookup (`"Cl"`, not `"CL"`). `"*"` is the wildcard.
    pub fn from_symbol(symbol: &str) -> Option<Element> {
        if symbol == "*" {
            return Some(Element::WILDCARD);
        }
        TABLE
            .iter()
            .position(|(s, _)| *s == symbol)
            .map(|i| Element(i as u8 + 1))
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        if self.0 == 0 {
            "*"
        } else {
            TABLE[self.0 as usize - 1].0
        }
    }

    /// Standard atomic weight; the wildcard weighs nothing.
    pub fn mass(self) -> f64 {
        if self.0 == 0 {
            0.0
        } else {
            TABLE[self.0 as usize - 1].1
        }
    }

    pub fn is_wildcard(self) -> bool {
        self.0 == 0
    }

    pub fn is_hydrogen(self) -> bool {
        self.0 == 1
    }

    /// Elements that may be written without brackets in SMILES.
    pub fn is_organic_subset(self) -> bool {
        matches!(self.0, 0 | 5 | 6 | 7 | 8 | 9 | 15 | 16 | 17 | 35 | 53)
    }

    /// Elements that may carry a lowercase aromatic symbol.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self.0, 0 | 5 | 6 | 7 | 8 | 15 | 16 | 33 | 34 | 52)
    }

    /// Allowed valences of the neutral element, smallest first. `None` means
    /// the valence is not checked (metals and exotic elements).
    pub fn default_valences(self) -> Option<&'static [u8]> {
        Some(match self.0 {
            0 => return None,
            1 => &[1],
            5 => &[3],
            6 => &[4],
            7 => &[3],
            8 => &[2],
            9 => &[1],
            14 => &[4],
            15 => &[3, 5],
            16 => &[2, 4, 6],
            17 => &[1],
            33 => &[3, 5],
            34 => &[2, 4, 6],
            35 => &[1],
            52 => &[2, 4, 6],
            53 => &[1, 3, 5],
            3 | 11 | 19 | 37 | 55 => &[1],
            4 | 12 | 20 | 38 | 56 => &[2],
            _ => return None,
        })
    }

    /// Allowed valences after adjusting for a formal charge. Electron-rich
    /// p-block atoms gain one bond per positive charge (N+ behaves like C),
    /// boron gains one per negative charge, and carbon loses one per unit
    /// of charge of either sign.
    pub fn allowed_valences(self, charge: i8) -> Option<ValenceSet> {
        let base = self.default_valences()?;
        let mut out = ValenceSet::default();
        for &v in base {
            let v = v as i16;
            let adjusted = match self.0 {
                6 | 14 => v - (charge as i16).abs(),
                5 => v - charge as i16,
                1 | 3 | 4 | 11 | 12 | 19 | 20 | 37 | 38 | 55 | 56 => v - (charge as i16).abs(),
                _ => v + charge as i16,
            };
            if adjusted >= 0 {
                out.push(adjusted as u8);
            }
        }
        if out.len == 0 {
            out.push(0);
        }
        Some(out)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Small inline set of valences (at most three per element).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ValenceSet {
    values: [u8; 3],
    len: usize,
}

impl ValenceSet {
    fn push(&mut self, v: u8) {
        if self.len < 3 && !self.values[..self.len].contains(&v) {
            self.values[self.len] = v;
            self.len += 1;
        }
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.values[..self.len]
    }

    pub fn max(&self) -> u8 {
        self.as_slice().iter().copied().max().unwrap_or(0)
    }

    /// Smallest allowed valence that can accommodate `used` bonds.
    pub fn smallest_at_least(&self, used: u32) -> Option<u8> {
        self.as_slice().iter().copied().filter(|&v| v as u32 >= used).min()
    }
}
