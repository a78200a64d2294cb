//! A loaded schema and graph, ready to answer query text.

use crate::engine::{mwlj, EngineConfig, ExecError, ExecStats};
use crate::operands::{build_dependency_graph, generate_operands, OperandError, OperandOptions};
use crate::query::{
    normalize, parse_query_with_limit, validate_query, NormalizedQuery, QueryAst, QueryError,
    DEFAULT_DEPTH_LIMIT,
};
use crate::rdf::{TermOverlay, TripleIndex, RDF_TYPE};
use crate::response::{
    eval_direct, eval_raw, BuildStats, GraphView, OracleOptions, Response, ResponseBuilder,
};
use crate::schema::{parse_sdl, validate_schema, IdMode, Schema, SchemaError, TermBinding};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreOptions {
    pub id_mode: IdMode,
    pub type_iri: String,
    pub depth_limit: usize,
}

impl Default for StoreOptions {
    fn default() -> Self {
        StoreOptions {
            id_mode: IdMode::Direct,
            type_iri: RDF_TYPE.to_owned(),
            depth_limit: DEFAULT_DEPTH_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryFailure {
    #[error("{0}")]
    Syntax(QueryError),
    #[error("{}", join(.0))]
    Invalid(Vec<QueryError>),
    #[error(transparent)]
    Operands(#[from] OperandError),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

fn join(errors: &[QueryError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl QueryFailure {
    /// Messages for a GraphQL `errors` array.
    pub fn messages(&self) -> Vec<String> {
        match self {
            QueryFailure::Invalid(errors) => errors.iter().map(ToString::to_string).collect(),
            other => vec![other.to_string()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub response: Response,
    pub engine: ExecStats,
    pub build: BuildStats,
    pub operand_count: usize,
}

pub struct Store {
    schema: Schema,
    binding: TermBinding,
    index: TripleIndex,
    options: StoreOptions,
}

impl Store {
    /// Parses and checks the schema against the options' ID mode.
    pub fn open(
        schema_text: &str,
        index: TripleIndex,
        options: StoreOptions,
    ) -> Result<Store, Vec<SchemaError>> {
        let (schema, binding) = parse_sdl(schema_text).map_err(|e| vec![e])?;
        validate_schema(&schema, &binding, options.id_mode)?;
        Ok(Store {
            schema,
            binding,
            index,
            options,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn binding(&self) -> &TermBinding {
        &self.binding
    }

    pub fn index(&self) -> &TripleIndex {
        &self.index
    }

    pub fn options(&self) -> &StoreOptions {
        &self.options
    }

    pub fn parse(&self, text: &str) -> Result<QueryAst, QueryFailure> {
        parse_query_with_limit(text, self.options.depth_limit).map_err(|e| {
            if e.is_syntax() {
                QueryFailure::Syntax(e)
            } else {
                QueryFailure::Invalid(vec![e])
            }
        })
    }

    pub fn normalize(&self, ast: &QueryAst) -> Result<NormalizedQuery, QueryFailure> {
        validate_query(&self.schema, ast).map_err(QueryFailure::Invalid)?;
        normalize(&self.schema, ast).map_err(|e| QueryFailure::Invalid(vec![e]))
    }

    /// Parse, validate and normalize.
    pub fn prepare(&self, text: &str) -> Result<NormalizedQuery, QueryFailure> {
        self.normalize(&self.parse(text)?)
    }

    pub fn execute(&self, text: &str, cfg: &EngineConfig) -> Result<Execution, QueryFailure> {
        let query = self.prepare(text)?;
        self.execute_normalized(&query, cfg)
    }

    pub fn execute_normalized(
        &self,
        query: &NormalizedQuery,
        cfg: &EngineConfig,
    ) -> Result<Execution, QueryFailure> {
        let mut overlay = TermOverlay::new(self.index.dictionary());
        let options = OperandOptions {
            id_mode: self.options.id_mode,
            type_iri: self.options.type_iri.clone(),
        };
        let ops = generate_operands(&self.schema, &self.binding, query, &mut overlay, &options)?;
        let graph = build_dependency_graph(&ops);
        let mut builder = ResponseBuilder::new(&ops.plan, &overlay);
        let engine = mwlj(&self.index, &ops, &graph, cfg, &mut |m| builder.push(m))?;
        let (response, build) = builder.finish();
        Ok(Execution {
            response,
            engine,
            build,
            operand_count: ops.len(),
        })
    }

    pub fn oracle_options(&self) -> OracleOptions {
        OracleOptions {
            id_mode: self.options.id_mode,
            type_iri: self.options.type_iri.clone(),
        }
    }

    pub fn graph_view(&self) -> GraphView<'_> {
        GraphView::new(&self.index, &self.options.type_iri)
    }

    /// The direct evaluator's answer for a normalized query.
    pub fn oracle(&self, view: &GraphView<'_>, query: &NormalizedQuery) -> Response {
        eval_direct(
            view,
            &self.schema,
            &self.binding,
            query,
            &self.oracle_options(),
        )
    }

    /// The field-collecting evaluator's answer for a query as written.
    pub fn oracle_raw(&self, view: &GraphView<'_>, query: &QueryAst) -> Response {
        eval_raw(
            view,
            &self.schema,
            &self.binding,
            query,
            &self.oracle_options(),
        )
    }
}
