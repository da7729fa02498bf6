//! Oracle that forwards every decision to an HTTP endpoint.
//!
//! `POST {base}/select` takes a [`SelectRequest`] and returns an
//! [`OracleDecision`]; `POST {base}/is_final` takes an [`IsFinalRequest`]
//! and returns an [`IsFinalResponse`].

use stml::c::ast::AnnotatedAst;
use stml::c::printer::print_c;
use stml::lang::rules::RuleSet;
use stml::oracle::{
    Candidate, IsFinalRequest, IsFinalResponse, Oracle, OracleDecision, OracleError, SelectRequest,
};

pub struct HttpOracle {
    base: String,
    agent: ureq::Agent,
}

impl HttpOracle {
    pub fn new(base: &str) -> Self {
        HttpOracle {
            base: base.trim_end_matches('/').to_string(),
            agent: ureq::Agent::new_with_defaults(),
        }
    }

    fn post<Req: serde::Serialize, Resp: serde::de::DeserializeOwned>(
        &self,
        path: &str,
        body: &Req,
    ) -> Result<Resp, OracleError> {
        let url = format!("{}/{path}", self.base);
        let fail = |e: ureq::Error| OracleError::External(format!("{url}: {e}"));
        self.agent
            .post(&url)
            .send_json(body)
            .map_err(fail)?
            .body_mut()
            .read_json::<Resp>()
            .map_err(fail)
    }
}

impl Oracle for HttpOracle {
    fn name(&self) -> String {
        self.base.clone()
    }

    fn select_rule(
        &mut self,
        _rules: &RuleSet,
        candidates: &[Candidate],
    ) -> Result<OracleDecision, OracleError> {
        let d: OracleDecision = self.post("select", &SelectRequest::new(candidates))?;
        if d.chosen >= candidates.len() {
            return Err(OracleError::External(format!(
                "chosen index {} out of range",
                d.chosen
            )));
        }
        Ok(d)
    }

    fn is_final(&mut self, _rules: &RuleSet, ast: &AnnotatedAst) -> Result<bool, OracleError> {
        let r: IsFinalResponse = self.post("is_final", &IsFinalRequest { code: print_c(ast) })?;
        Ok(r.is_final)
    }
}
