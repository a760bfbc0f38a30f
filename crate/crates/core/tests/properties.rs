mod common;

macro_rules! suite {
    ($name:ident) => {
        #[test]
        fn $name() {
            if let Err(e) = common::$name(&mut common::runner()) {
                panic!("{e}");
            }
        }
    };
}

suite!(periodicity);
suite!(negation);
suite!(odd_m_rows);
suite!(lattice_isometry);
suite!(key_witness);
suite!(isometry_completeness);
suite!(fingerprint_completeness);
suite!(isometry_spectra);
suite!(sphere_bound);
suite!(arithmetic);
