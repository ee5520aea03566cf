use necklace_core::enumerate::{word, Enumerator, Filter};
use necklace_core::psl2::StoneAlgebra;
use necklace_core::{Mode, NecklaceDiagram, Stone};
use proptest::prelude::*;

fn stones(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Stone>> {
    prop::collection::vec((0usize..4).prop_map(Stone::from_index), len)
}

fn valid_twelve() -> &'static [NecklaceDiagram] {
    use std::sync::OnceLock;
    static CELL: OnceLock<Vec<NecklaceDiagram>> = OnceLock::new();
    CELL.get_or_init(|| Enumerator::default().diagrams(12, Mode::Oriented, Filter::None).unwrap())
}

proptest! {
    #[test]
    fn validity_is_symmetric(s in stones(1..19), k in 0usize..18) {
        let d = NecklaceDiagram::new(s).unwrap();
        let v = d.is_valid();
        prop_assert_eq!(d.rotate(k).is_valid(), v);
        prop_assert_eq!(d.mirror().is_valid(), v);
        prop_assert_eq!(d.dual().is_valid(), v);
    }

    #[test]
    fn canonical_form_is_a_class_function(s in stones(1..19), k in 0usize..18) {
        let d = NecklaceDiagram::new(s).unwrap();
        for mode in [Mode::Oriented, Mode::Symmetry] {
            let c = d.canonical(mode);
            prop_assert_eq!(d.rotate(k).canonical(mode), c.clone());
            prop_assert_eq!(c.parse::<NecklaceDiagram>().unwrap().canonical(mode), c.clone());
        }
        prop_assert_eq!(d.mirror().canonical(Mode::Symmetry), d.canonical(Mode::Symmetry));
    }

    #[test]
    fn text_and_packed_round_trip(s in stones(1..25)) {
        let d = NecklaceDiagram::new(s.clone()).unwrap();
        prop_assert_eq!(d.encode().parse::<NecklaceDiagram>().unwrap(), d.clone());
        prop_assert_eq!(d.encode().to_lowercase().parse::<NecklaceDiagram>().unwrap(), d.clone());
        let w = word::pack(&s);
        prop_assert_eq!(word::unpack(w, s.len()), s.clone());
        prop_assert_eq!(word::to_string(word::mirror(w, s.len()), s.len()), d.mirror().encode());
    }

    #[test]
    fn monodromy_is_multiplicative(a in stones(1..10), b in stones(1..10)) {
        let alg = StoneAlgebra::standard();
        let joined: Vec<Stone> = a.iter().chain(&b).copied().collect();
        let product = alg.word_monodromy(&a).unwrap().mul(&alg.word_monodromy(&b).unwrap()).unwrap();
        prop_assert_eq!(alg.word_monodromy(&joined).unwrap(), product);
    }

    #[test]
    fn valid_diagrams_have_consistent_invariants(i in 0usize..16646) {
        let d = &valid_twelve()[i];
        prop_assert!(d.is_valid());
        let c = d.counts();
        prop_assert!(c.arrows() >= 2);
        prop_assert!(c.circles + c.squares <= 10);
        prop_assert_eq!(d.invariants().euler, 2 * (c.circles as i64 - c.squares as i64));
        prop_assert_eq!(d.dual().invariants().euler, -d.invariants().euler);
    }
}

#[test]
fn class_engines_agree_at_twelve() {
    let e = Enumerator::default();
    for mode in [Mode::Oriented, Mode::Symmetry] {
        assert_eq!(
            e.canonical_words(12, mode, Filter::None).unwrap(),
            e.canonical_words_bruteforce(12, mode).unwrap()
        );
    }
    assert_eq!(e.pruned_count(12).unwrap(), e.mitm_count(12).unwrap());
}
