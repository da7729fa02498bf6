//! Interactive session: list matches, apply, undo, export.

use stml::c::parser::parse_c;
use stml::lang::rules::default_rules;
use stml::session::{ApplyRequest, Session};

fn main() {
    let ast = parse_c(include_str!("../corpus/fusion_step0.c")).unwrap();
    let mut s = Session::new("demo", ast, default_rules().unwrap(), Vec::new());
    let views = s.match_views();
    for v in &views {
        println!("#{} {} {:?}", v.m.id, v.m.rule, v.m.certainty);
    }
    let fusion = views
        .iter()
        .find(|v| v.m.rule == "For-LoopFusion")
        .expect("fusion applies");
    println!("{}", fusion.preview);
    let step = s
        .apply(&ApplyRequest {
            match_id: fusion.m.id,
            force: false,
            digest: Some(fusion.m.digest.clone()),
        })
        .unwrap();
    println!("applied {} -> {}", step.m.rule, step.after_hash);
    s.undo().unwrap();
    println!("undone, {} steps", s.history().len());
    println!(
        "{}",
        serde_json::to_string_pretty(&s.export().report).unwrap()
    );
}
