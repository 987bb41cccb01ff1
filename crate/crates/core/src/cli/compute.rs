//! Per-kind scenario evaluation.
//!
//! Loading (building validated domain values from parameters) reports
//! [`CliError::Validation`]; failures after that are [`CliError::Computation`].

use num_complex::Complex64;

use super::document::{ResultDocument, Table};
use super::scenario::{
    complex, BayesParams, Bb84Params, DetectorParams, RetrodictParams, Scenario, ScenarioKind, ScissorsParams,
    SynthesisParams,
};
use super::CliError;
use crate::bayes::{self, ConditionalTable, Distribution, EventSpace};
use crate::bb84::{self, Polarization};
use crate::hilbert::{Operator, DEFAULT_TOL};
use crate::optics::{self, BeamSplitter, FockSpace, ReferenceState};
use crate::parallel::Strategy;
use crate::retrodict::{
    born_probability, is_unbiased, outcome_prior, predictive_conditional_subset, preparation_pom,
    retro_distribution_biased, retro_distribution_unbiased, retro_state, BiasedElements, Pom, PreparationEnsemble,
};

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn computation(e: impl std::fmt::Display) -> CliError {
    CliError::Computation(e.to_string())
}

pub fn evaluate(scenario: &Scenario) -> Result<ResultDocument, CliError> {
    let mut doc = ResultDocument::new(scenario.kind.name(), scenario.source.clone());
    doc.diagnostic("tolerance", DEFAULT_TOL);
    match &scenario.kind {
        ScenarioKind::Bayes(p) => run_bayes(p, &mut doc)?,
        ScenarioKind::Retrodict(p) => run_retrodict(p, &mut doc)?,
        ScenarioKind::Detector(p) => run_detector(p, &mut doc)?,
        ScenarioKind::Synthesis(p) => run_synthesis(p, &mut doc)?,
        ScenarioKind::Scissors(p) => run_scissors(p, &mut doc)?,
        ScenarioKind::Bb84(p) => run_bb84(p, &mut doc)?,
    }
    doc.check()?;
    Ok(doc)
}

fn run_bayes(p: &BayesParams, doc: &mut ResultDocument) -> Result<(), CliError> {
    let priors = EventSpace::new(p.events.clone(), p.priors.clone()).map_err(validation)?;
    let cond =
        ConditionalTable::new(p.events.clone(), p.outcomes.clone(), p.conditional.clone()).map_err(validation)?;
    if let Some(obs) = &p.observed {
        if !p.outcomes.contains(obs) {
            return Err(CliError::Validation(format!("observed outcome `{obs}` is not listed in `outcomes`")));
        }
    }
    let joint = bayes::joint(&priors, &cond).map_err(computation)?;
    let marginal = bayes::predict_marginal(&priors, &cond).map_err(computation)?;
    doc.table(Table::conditional("predictive", &cond));
    doc.table(Table::joint("joint", &joint));
    doc.table(Table::distribution("outcome_marginal", "P(outcome)", &marginal));

    let mut rows = Vec::new();
    let mut possible = Vec::new();
    let mut impossible = Vec::new();
    for b in &p.outcomes {
        match bayes::retrodict_conditional(&priors, &cond, b) {
            Ok(d) => {
                possible.push(b.clone());
                rows.push(d.probs);
            }
            Err(bayes::BayesError::ZeroProbabilityOutcome(_)) => impossible.push(b.clone()),
            Err(e) => return Err(computation(e)),
        }
    }
    if !possible.is_empty() {
        let table = ConditionalTable::new(possible, p.events.clone(), rows).map_err(computation)?;
        doc.table(Table::conditional("retrodictive", &table));
    }
    doc.diagnostic("zero_probability_outcomes", impossible);
    if let Some(obs) = &p.observed {
        let post = bayes::retrodict_conditional(&priors, &cond, obs).map_err(computation)?;
        doc.table(Table::distribution("posterior", obs, &post));
    }
    Ok(())
}

fn run_retrodict(p: &RetrodictParams, doc: &mut ResultDocument) -> Result<(), CliError> {
    let events = p
        .ensemble
        .iter()
        .map(|e| Ok((e.label.clone(), e.prior, e.state.build(&format!("state `{}`", e.label))?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let ens = PreparationEnsemble::new(events).map_err(validation)?;
    let elements = p
        .pom
        .iter()
        .map(|e| Ok((e.label.clone(), e.element.build(&format!("element `{}`", e.label))?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let pom = Pom::new(elements).map_err(validation)?;
    if pom.dims() != ens.dims() {
        return Err(CliError::Validation(format!(
            "ensemble acts on {:?} but the POM on {:?}",
            ens.dims().dims(),
            pom.dims().dims()
        )));
    }
    let outcome_labels: Vec<String> = pom.labels().map(str::to_owned).collect();
    let event_labels: Vec<String> = ens.events().iter().map(|e| e.label.clone()).collect();
    for l in p.subset.iter().flatten().chain(p.observed.iter()) {
        if !outcome_labels.contains(l) {
            return Err(CliError::Validation(format!("unknown outcome label `{l}`")));
        }
    }
    let tol = p.unbiased_tolerance.unwrap_or(DEFAULT_TOL);
    if tol.is_nan() || tol <= 0.0 {
        return Err(CliError::Validation("unbiased_tolerance must be positive".into()));
    }

    // predictive side
    let pred_rows = ens
        .events()
        .iter()
        .map(|e| pom.elements().iter().map(|el| born_probability(&e.state, &el.op)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(computation)?;
    let predictive =
        ConditionalTable::new(event_labels.clone(), outcome_labels.clone(), pred_rows).map_err(computation)?;
    doc.table(Table::conditional("predictive", &predictive));
    let priors =
        EventSpace::new(event_labels.clone(), ens.events().iter().map(|e| e.prior).collect()).map_err(computation)?;
    let marginal = bayes::predict_marginal(&priors, &predictive).map_err(computation)?;
    doc.table(Table::distribution("outcome_marginal", "P(outcome)", &marginal));

    // retrodictive side
    let unbiased = is_unbiased(&ens, tol);
    doc.diagnostic("unbiased", unbiased);
    let biased = BiasedElements::from_ensemble(&ens);
    doc.diagnostic("bias_deviation", biased.bias());
    let prep = if unbiased {
        let prep = preparation_pom(&ens).map_err(computation)?;
        for el in prep.elements() {
            doc.operator(&format!("preparation_element[{}]", el.label), &el.op);
        }
        doc.diagnostic("preparation_completeness_deviation", prep.completeness_deviation());
        Some(prep)
    } else {
        None
    };

    let mut rows = Vec::new();
    let mut possible = Vec::new();
    let mut impossible = Vec::new();
    let mut oracle_dev: f64 = 0.0;
    for (el, &p_b) in pom.elements().iter().zip(&marginal.probs) {
        if p_b <= DEFAULT_TOL {
            impossible.push(el.label.clone());
            continue;
        }
        let post = match &prep {
            Some(prep) => retro_distribution_unbiased(prep, &el.op),
            None => retro_distribution_biased(&biased, &el.op),
        }
        .map_err(computation)?;
        doc.operator(&format!("retro_state[{}]", el.label), &retro_state(&el.op).map_err(computation)?);
        let oracle = bayes::retrodict_conditional(&priors, &predictive, &el.label).map_err(computation)?;
        for (a, b) in post.probs.iter().zip(&oracle.probs) {
            oracle_dev = oracle_dev.max((a - b).abs());
        }
        possible.push(el.label.clone());
        rows.push(post.probs);
    }
    if !possible.is_empty() {
        let table = ConditionalTable::new(possible, event_labels.clone(), rows).map_err(computation)?;
        doc.table(Table::conditional("retrodictive", &table));
    }
    doc.diagnostic("retrodictive_pathway", if unbiased { "preparation_pom" } else { "biased" });
    doc.diagnostic("bayes_oracle_max_deviation", oracle_dev);
    doc.diagnostic("zero_probability_outcomes", impossible);
    if unbiased {
        let priors_unbiased: Vec<f64> = pom.elements().iter().map(|el| outcome_prior(&el.op)).collect();
        doc.series("outcome_prior_unbiased", priors_unbiased);
    }

    if let Some(obs) = &p.observed {
        let element = pom.element(obs).map_err(validation)?;
        let post = match &prep {
            Some(prep) => retro_distribution_unbiased(prep, element),
            None => retro_distribution_biased(&biased, element),
        };
        let post = post.map_err(computation)?;
        if marginal.get(obs).unwrap_or(0.0) <= DEFAULT_TOL {
            return Err(CliError::Computation(format!("observed outcome `{obs}` has zero probability")));
        }
        doc.table(Table::distribution("posterior", obs, &post));
    }

    if let Some(subset) = &p.subset {
        let refs: Vec<&str> = subset.iter().map(String::as_str).collect();
        let mut rows = Vec::new();
        for e in ens.events() {
            let row = refs
                .iter()
                .map(|&b| predictive_conditional_subset(&e.state, &pom, &refs, b))
                .collect::<Result<Vec<_>, _>>()
                .map_err(computation)?;
            rows.push(row);
        }
        let table = ConditionalTable::new(event_labels, subset.clone(), rows).map_err(computation)?;
        doc.table(Table::conditional("predictive_subset", &table));
    }
    Ok(())
}

fn run_detector(p: &DetectorParams, doc: &mut ResultDocument) -> Result<(), CliError> {
    let space = FockSpace::new(p.cutoff).map_err(validation)?;
    space.check_count(p.n).map_err(validation)?;
    if !(p.eta > 0.0 && p.eta <= 1.0) {
        return Err(CliError::Validation(format!("eta {} must lie in (0, 1]", p.eta)));
    }
    let check = optics::check_detector(p.n, p.eta, &space, Strategy::default()).map_err(computation)?;
    let bs = BeamSplitter::from_efficiency(p.eta).map_err(validation)?;
    doc.series("retro_diagonal_closed_form", check.closed_form.clone());
    doc.series("retro_diagonal_pipeline", check.pipeline.clone());
    doc.value("theta", bs.theta());
    doc.value("closed_form_trace", check.closed_form_trace);
    doc.value("pipeline_max_deviation", check.max_deviation);
    doc.diagnostic("truncation_tail_bound", check.tail_bound);
    doc.diagnostic("closed_form_trace_deficit", 1.0 - check.closed_form_trace);
    Ok(())
}

fn reference_state(amps: &[[f64; 2]]) -> Result<ReferenceState, CliError> {
    ReferenceState::new(amps.iter().map(complex).collect()).map_err(validation)
}

fn run_synthesis(p: &SynthesisParams, doc: &mut ResultDocument) -> Result<(), CliError> {
    let space = FockSpace::new(p.cutoff).map_err(validation)?;
    space.check_count(p.n + p.m).map_err(validation)?;
    let reference = reference_state(&p.reference)?;
    reference.padded(&space).map_err(validation)?;
    let bs = BeamSplitter::new(p.theta).map_err(validation)?;
    let retro = optics::projection_synthesis_retro(&reference, p.n, p.m, &bs, &space).map_err(computation)?;
    doc.operator("retro_state", &retro);
    doc.series("photon_number_distribution", retro.real_diagonal_entries());
    doc.value("purity", retro.trace_product(&retro).map_err(computation)?.re);
    if (p.n, p.m) == (1, 0) {
        let ket = optics::single_count_retro_ket(&reference, p.theta, space.dim()).map_err(computation)?;
        let fid = retro.expectation(&ket).map_err(computation)?.re;
        doc.diagnostic("closed_form_fidelity", fid);
    }
    Ok(())
}

fn run_scissors(p: &ScissorsParams, doc: &mut ResultDocument) -> Result<(), CliError> {
    let space = FockSpace::new(p.cutoff).map_err(validation)?;
    let reference = reference_state(&p.reference)?;
    reference.padded(&space).map_err(validation)?;
    let bs = BeamSplitter::new(p.theta).map_err(validation)?;
    let out = optics::scissors_output(&reference, &bs, &space).map_err(computation)?;
    let closed = optics::scissors_closed_form(&reference, p.theta).map_err(computation)?;
    doc.operator("output_state", &out);
    let closed_op = Operator::projector(out.dims(), &closed).map_err(computation)?;
    doc.operator("closed_form_state", &closed_op);
    let fid = out.expectation(&closed).map_err(computation)?.re;
    doc.value("closed_form_fidelity", fid);
    let amps: Vec<Complex64> = closed.to_vec();
    doc.series("closed_form_probabilities", amps.iter().map(|z| z.norm_sqr()).collect());
    Ok(())
}

fn run_bb84(p: &Bb84Params, doc: &mut ResultDocument) -> Result<(), CliError> {
    if p.slots == Some(0) {
        return Err(CliError::Validation("`slots` must be at least 1".into()));
    }
    let predictive = bb84::predictive_table();
    let retrodictive = bb84::retrodictive_table();
    doc.table(Table::conditional("predictive", &predictive));
    doc.table(Table::conditional("retrodictive", &retrodictive));
    let priors = EventSpace::uniform(predictive.row_labels().to_vec()).map_err(computation)?;
    let classical = bayes::retrodictive_table(&priors, &predictive).map_err(computation)?;
    let dev = classical
        .rows()
        .iter()
        .flatten()
        .zip(retrodictive.rows().iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    doc.diagnostic("bayes_consistency_max_deviation", dev);

    if let Some(slots) = p.slots {
        let sim = bb84::simulate_slots(slots, p.seed, p.attack).map_err(computation)?;
        let s = &sim.summary;
        let empirical = s.empirical_predictive();
        let (mut labels, mut rows) = (Vec::new(), Vec::new());
        for a in Polarization::ALL {
            if s.counts[a.index()].iter().sum::<u64>() > 0 {
                labels.push(a.event_label('a'));
                rows.push(empirical[a.index()].to_vec());
            }
        }
        let cols: Vec<String> = Polarization::ALL.iter().map(|b| b.event_label('b')).collect();
        let table = ConditionalTable::new(labels, cols, rows).map_err(computation)?;
        doc.table(Table::conditional("empirical_predictive", &table));
        doc.value("slots", s.slots as f64);
        doc.value("eavesdrop_flags", s.flagged as f64);
        doc.value("same_basis_slots", s.same_basis as f64);
        doc.value("same_basis_error_rate", s.same_basis_error_rate());
        let alice: Vec<String> = Polarization::ALL.iter().map(|a| a.event_label('a')).collect();
        let totals: Vec<f64> = s.counts.iter().map(|r| r.iter().sum::<u64>() as f64 / s.slots as f64).collect();
        doc.table(Table::distribution("alice_frequencies", "P(a)", &Distribution { labels: alice, probs: totals }));
        if p.emit_records {
            doc.outputs.records = Some(sim.records);
        }
    }
    Ok(())
}
