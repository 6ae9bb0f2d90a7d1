use fmarkov::suite::{self, CriterionResult, SuiteOptions};

fn report(run: suite::Runner) {
    let r: CriterionResult = run(&SuiteOptions::default()).expect("criterion runner errored");
    println!("{} ({} ms)", r.line(), r.elapsed_ms);
    for note in &r.notes {
        println!("    note: {note}");
    }
    for f in &r.failures {
        println!("    failure: {f}");
    }
    assert!(r.pass, "{}", r.line());
}

#[test]
fn criterion_1_normal_form_matches_pl_oracle() {
    report(suite::criterion_normal_forms);
}

#[test]
fn criterion_2_pl_generators_satisfy_relations() {
    report(suite::criterion_pl_relations);
}

#[test]
fn criterion_3_partial_shifts_injective() {
    report(suite::criterion_partial_shifts);
}

#[test]
fn criterion_4_site_relations() {
    report(suite::criterion_site_relations);
}

#[test]
fn criterion_5_fixed_supports() {
    report(suite::criterion_fixed_supports);
}

#[test]
fn criterion_6_markov_windows() {
    report(suite::criterion_markov);
}

#[test]
fn criterion_7_commuting_squares() {
    report(suite::criterion_commuting_squares);
}

#[test]
fn criterion_8_dilation() {
    report(suite::criterion_dilation);
}

#[test]
fn criterion_9_site_model() {
    report(suite::criterion_bernoulli);
}
