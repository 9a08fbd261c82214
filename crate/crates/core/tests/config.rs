mod common;

use common::{example_52, rel_err};
use uistop::config::ParamsDoc;
use uistop::schedule::{beta, BenefitSchedule};
use uistop::{model, ModelError};

const EXAMPLE: &str = "r = 0.0004\nlambda0 = 0.01\nmu = 0.0004\nsigma = 0.02\npremium = 9000\nbeta = 30\nx0 = 346\n";

#[test]
fn parses_the_worked_example() {
    let doc = ParamsDoc::from_toml_str(EXAMPLE).unwrap();
    assert_eq!(doc.to_params().unwrap(), example_52());
}

#[test]
fn round_trips() {
    let doc = ParamsDoc::from_params(&example_52());
    let text = doc.to_toml_string().unwrap();
    let back = ParamsDoc::from_toml_str(&text).unwrap();
    assert_eq!(back, doc);
    assert_eq!(model::solve(&back.to_params().unwrap()), model::solve(&example_52()));
}

#[test]
fn schedule_instead_of_beta() {
    let text = "r = 0.0004\nlambda0 = 0.01\nmu = 0.0004\nsigma = 0.02\npremium = 9000\nx0 = 346\nlambda1 = 0.011\n\n[schedule]\nh0 = 0.574\ns0_weeks = 34.666666666666664\ndelta = 0.009378\n";
    let p = ParamsDoc::from_toml_str(text).unwrap().to_params().unwrap();
    let s = BenefitSchedule::piecewise_exponential(0.574, 34.666666666666664, 0.009378).unwrap();
    assert!(rel_err(p.beta, beta(&s, 0.011, 0.0004).unwrap()) < 1e-15);
    let doc = ParamsDoc::from_toml_str(text).unwrap();
    assert_eq!(ParamsDoc::from_toml_str(&doc.to_toml_string().unwrap()).unwrap(), doc);
}

#[test]
fn mortality_keys() {
    let text = format!("{EXAMPLE}lambda2 = 0.0005\na_dag = 52\n");
    let p = ParamsDoc::from_toml_str(&text).unwrap().to_params().unwrap();
    let m = p.mortality.unwrap();
    assert_eq!((m.lambda2, m.a_dag), (0.0005, 52.0));
    assert!(ParamsDoc::from_toml_str(&format!("{EXAMPLE}a_dag = 52\n")).unwrap().to_params().is_err());
}

#[test]
fn rejects_bad_documents() {
    let both = format!("{EXAMPLE}lambda1 = 0.01\n[schedule]\nh0 = 0.5\ndelta = 0.01\n");
    assert!(matches!(ParamsDoc::from_toml_str(&both).unwrap().to_params(), Err(ModelError::Config(_))));
    let neither = EXAMPLE.replace("beta = 30\n", "");
    assert!(ParamsDoc::from_toml_str(&neither).unwrap().to_params().is_err());
    assert!(ParamsDoc::from_toml_str(&format!("{EXAMPLE}bogus = 1\n")).is_err());
    let invalid = EXAMPLE.replace("mu = 0.0004", "mu = 0.02");
    assert!(matches!(
        ParamsDoc::from_toml_str(&invalid).unwrap().to_params(),
        Err(ModelError::AssumptionViolated { .. })
    ));
}
