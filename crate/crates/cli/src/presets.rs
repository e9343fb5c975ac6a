//! Named scenario presets bundled with the binary. Each entry is a plain
//! scenario JSON file from `presets/`; nothing here is generated code.

pub const PRESETS: &[(&str, &str)] = &[
    ("fig5", include_str!("../presets/fig5.json")),
    ("fig5_fdss", include_str!("../presets/fig5_fdss.json")),
    ("fig6", include_str!("../presets/fig6.json")),
    ("fig7_fftshift", include_str!("../presets/fig7_fftshift.json")),
    ("fig7_shaped", include_str!("../presets/fig7_shaped.json")),
    ("fig8_rep2", include_str!("../presets/fig8_rep2.json")),
    ("fig8_rep3", include_str!("../presets/fig8_rep3.json")),
    ("fig9a", include_str!("../presets/fig9a.json")),
    ("fig9b", include_str!("../presets/fig9b.json")),
    ("fig9c", include_str!("../presets/fig9c.json")),
    ("fig9d", include_str!("../presets/fig9d.json")),
    ("fig10_plain", include_str!("../presets/fig10_plain.json")),
    ("fig10_rect", include_str!("../presets/fig10_rect.json")),
    ("fig10_rect_fdss", include_str!("../presets/fig10_rect_fdss.json")),
    ("fig10_ls", include_str!("../presets/fig10_ls.json")),
    ("fig10_rep68", include_str!("../presets/fig10_rep68.json")),
    ("fig10_rep44", include_str!("../presets/fig10_rep44.json")),
    ("fig10_rep32", include_str!("../presets/fig10_rep32.json")),
    ("fig10_zc_u1", include_str!("../presets/fig10_zc_u1.json")),
    ("fig10_zc_u17", include_str!("../presets/fig10_zc_u17.json")),
    ("fig11_normal", include_str!("../presets/fig11_normal.json")),
    ("fig11_concentrated", include_str!("../presets/fig11_concentrated.json")),
];

pub fn lookup(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ooksim_core::Scenario;

    #[test]
    fn every_preset_parses_and_validates() {
        for (name, text) in PRESETS {
            let sc = Scenario::from_json(text)
                .unwrap_or_else(|e| panic!("preset {name}: {e}"));
            sc.validate().unwrap_or_else(|e| panic!("preset {name}: {e}"));
        }
    }

    #[test]
    fn preset_names_are_unique() {
        let mut names = names();
        names.sort_unstable();
        let before = names.len();
        names.dedup();
        assert_eq!(before, names.len());
    }

    #[test]
    fn lookup_finds_known_names_only() {
        assert!(lookup("fig10_zc_u17").is_some());
        assert!(lookup("no_such_preset").is_none());
    }
}
