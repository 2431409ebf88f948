use chatstylo::classifiers::{LinearSvmModel, NaiveBayesModel};
use chatstylo::eval::{confusion, report};
use chatstylo::experiment::split;
use chatstylo::features::{vectorize, NGramSpec, Vocabulary, WeightScheme};
use chatstylo::ingest::Document;
use chatstylo::rng;
use chatstylo::synthgen::{default_profiles, generate, SeparabilityDial};

fn main() {
    let corpus = generate(&default_profiles(), SeparabilityDial::default(), 50, 100, 7).unwrap();
    let plan = split(&corpus, 7).unwrap();
    let pick = |ids: &[usize]| -> Vec<&Document> { ids.iter().map(|&i| &corpus.documents()[i]).collect() };
    let train = pick(&plan.train_ids);
    let tests = [pick(&plan.test1_ids), pick(&plan.test2_ids)];
    let idx = corpus.class_index();
    let vocab = Vocabulary::build(&train, NGramSpec::parse("word1").unwrap(), 1, false).unwrap();
    let train_m = vectorize(&train, &vocab, WeightScheme::Binary, &idx, false).unwrap();
    let nb = NaiveBayesModel::train(&train_m, 1.0).unwrap();
    let svm = LinearSvmModel::train(&train_m, 1e-4, 20, rng::derive_seed(7, b"svm")).unwrap();
    for (name, predict) in [
        ("nb", Box::new(|r: &[(usize, f64)]| nb.predict(r).0) as Box<dyn Fn(&[(usize, f64)]) -> usize>),
        ("svm", Box::new(|r: &[(usize, f64)]| svm.predict(r).0)),
    ] {
        for (t, docs) in tests.iter().enumerate() {
            let m = vectorize(docs, &vocab, WeightScheme::Binary, &idx, false).unwrap();
            let preds: Vec<usize> = m.rows().iter().map(|r| predict(r)).collect();
            let cm = confusion(m.labels(), &preds, 4).unwrap();
            let r = report(&cm);
            println!("{name} test{} accuracy = {:?} -> {}", t + 1, r.accuracy, chatstylo::eval::format_metric(r.accuracy));
        }
    }
}
