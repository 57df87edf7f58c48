use std::collections::BTreeSet;

use super::entity::{code_id, field, ConceptCard, Edge, EdgeKind, Entity, EntityKind, Source};
use super::{KgError, KnowledgeGraph};
use crate::model_dsl::{
    emit_constraint, emit_objective, DataLiteral, DeclKind, ModelAst, SetDef, SymbolTable, Usage,
};

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

fn set_def_text(def: &SetDef) -> String {
    match def {
        SetDef::Range(lo, hi) => format!("{lo}..{hi}"),
        SetDef::Members(m) => format!("{{{}}}", m.join(", ")),
    }
}

fn data_text(d: &DataLiteral) -> String {
    match d {
        DataLiteral::Scalar(v) => fmt_num(*v),
        DataLiteral::List(vs) => format!("[{}]", vs.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(", ")),
    }
}

/// Build the code entity for one declaration of `ast`.
fn declaration_entity(ast: &ModelAst, name: &str, kind: DeclKind) -> Entity {
    let ek = EntityKind::from_decl(kind);
    let mut e = Entity::new(code_id(name), ek, name, Source::Code).with_field(field::SOLVER_SYMBOL, name);
    match kind {
        DeclKind::Set => {
            let s = ast.set(name).expect("declared set");
            e = e.with_field(field::SET_DEF, set_def_text(&s.def));
        }
        DeclKind::Param => {
            let p = ast.param(name).expect("declared param");
            if !p.index_sets.is_empty() {
                e = e.with_field(field::INDEX_SETS, p.index_sets.join(","));
            }
            if let Some(d) = &p.data {
                e = e.with_field(field::VALUE, data_text(d));
            }
        }
        DeclKind::Var => {
            let v = ast.var(name).expect("declared var");
            e = e.with_field(field::DOMAIN, v.domain.as_str());
            if !v.index_sets.is_empty() {
                e = e.with_field(field::INDEX_SETS, v.index_sets.join(","));
            }
            if let Some((lo, hi)) = v.bounds {
                e = e.with_field(field::BOUNDS, format!("[{}, {}]", fmt_num(lo), fmt_num(hi)));
            }
        }
        DeclKind::Constraint => {
            let c = ast.constraint(name).expect("declared constraint");
            let sets: Vec<String> =
                c.quantifier.iter().flat_map(|q| q.bindings.iter().map(|b| b.set.clone())).collect();
            if !sets.is_empty() {
                e = e.with_field(field::INDEX_SETS, sets.join(","));
            }
            // emission of an already-parsed constraint cannot fail
            e = e.with_field(field::EXPRESSION, emit_constraint(c).unwrap_or_default());
        }
        DeclKind::Objective => {
            let o = ast.objective.as_ref().expect("objective");
            e = e
                .with_field(field::EXPRESSION, emit_objective(o).unwrap_or_default())
                .with_field(field::DOMAIN, o.sense.as_str());
        }
    }
    e
}

impl KnowledgeGraph {
    /// Create or upgrade the code entity for a declaration.
    fn upsert_code(&mut self, entity: Entity) -> Result<(), KgError> {
        match self.entity(&entity.id) {
            None => self.add_entity(entity),
            Some(existing) => {
                let mut merged = entity;
                if merged.description.is_empty() {
                    merged.description = existing.description.clone();
                }
                self.replace_entity(merged)
            }
        }
    }

    /// Entity id for a referenced name, creating an unresolved placeholder
    /// when nothing with that symbol exists yet.
    fn resolve_or_stub(&mut self, name: &str, usage: Usage) -> Result<String, KgError> {
        if let Some(e) = self.find_code_symbol(name) {
            return Ok(e.id.clone());
        }
        let kind = match usage {
            Usage::Iteration => EntityKind::IndexSet,
            Usage::Index => EntityKind::Parameter,
            Usage::Value => EntityKind::DecisionVariable,
        };
        let stub = Entity::new(code_id(name), kind, name, Source::Code)
            .with_field(field::SOLVER_SYMBOL, name)
            .with_field(field::UNRESOLVED, "true");
        let id = stub.id.clone();
        self.add_entity(stub)?;
        Ok(id)
    }

    /// Add one code entity per declaration, `used_in` edges from each use
    /// site to the value it reads, and `depends_on` edges to iterated and
    /// indexing sets. Returns the ids of the declared entities.
    pub fn ingest_model(&mut self, ast: &ModelAst, table: &SymbolTable) -> Result<Vec<String>, KgError> {
        for name in ast.declared_names() {
            let requested = EntityKind::from_decl(table.declarations[name].kind);
            if let Some(existing) = self.entity(&code_id(name)) {
                if existing.kind != requested && !existing.is_unresolved() {
                    return Err(KgError::ConflictingEntity {
                        name: name.to_string(),
                        existing: existing.kind,
                        requested,
                    });
                }
            }
        }
        let mut ids = Vec::new();
        for name in ast.declared_names() {
            let decl = &table.declarations[name];
            let entity = declaration_entity(ast, name, decl.kind);
            ids.push(entity.id.clone());
            self.upsert_code(entity)?;
        }

        let members: BTreeSet<&str> = table.set_members(ast).into_iter().collect();
        for name in ast.declared_names() {
            let decl = &table.declarations[name];
            if matches!(decl.kind, DeclKind::Param | DeclKind::Var) {
                let src = code_id(name);
                for set in &decl.index_sets {
                    let dst = self.resolve_or_stub(set, Usage::Iteration)?;
                    if dst != src {
                        self.add_edge(Edge::new(src.clone(), dst, EdgeKind::DependsOn))?;
                    }
                }
            }
        }
        for r in &table.references {
            if r.usage == Usage::Index && members.contains(r.name.as_str()) && !table.declarations.contains_key(&r.name) {
                continue;
            }
            let src = code_id(&r.site);
            let dst = self.resolve_or_stub(&r.name, r.usage)?;
            if dst == src {
                continue;
            }
            let kind = match r.usage {
                Usage::Iteration => EdgeKind::DependsOn,
                Usage::Value | Usage::Index => EdgeKind::UsedIn,
            };
            self.add_edge(Edge::new(src, dst, kind))?;
        }
        Ok(ids)
    }

    /// Add one paper-source entity per card and the card relations as
    /// requirement-direction edges.
    pub fn ingest_concept_cards(&mut self, cards: &[ConceptCard]) -> Result<Vec<String>, KgError> {
        // targets must resolve before anything is written
        let batch: BTreeSet<String> = cards.iter().map(|c| c.entity_id()).collect();
        for c in cards {
            if c.name.trim().is_empty() {
                return Err(KgError::SchemaViolation("concept card with empty name".into()));
            }
            for r in &c.relations {
                let t = super::paper_id(&r.target);
                if !batch.contains(&t) && !self.contains(&t) {
                    return Err(KgError::DanglingRelation { card: c.name.clone(), target: r.target.clone() });
                }
            }
        }
        let mut ids = Vec::new();
        for c in cards {
            let mut e = Entity::new(c.entity_id(), c.kind, c.name.clone(), Source::Paper)
                .with_description(c.description.clone())
                .with_field(field::SNIPPET, c.snippet.clone());
            if let Some(h) = &c.solver_symbol_hint {
                e = e.with_field(field::SOLVER_SYMBOL_HINT, h.clone());
            }
            if !c.aliases.is_empty() {
                e = e.with_field(field::ALIASES, c.aliases.join(","));
            }
            match self.entity(&e.id) {
                None => self.add_entity(e)?,
                Some(existing) if existing.kind == e.kind => self.replace_entity(e)?,
                Some(existing) => {
                    return Err(KgError::ConflictingEntity {
                        name: c.name.clone(),
                        existing: existing.kind,
                        requested: c.kind,
                    })
                }
            }
            ids.push(c.entity_id());
        }
        for c in cards {
            for r in &c.relations {
                let dst = super::paper_id(&r.target);
                if dst != c.entity_id() {
                    self.add_edge(Edge::new(c.entity_id(), dst, r.kind.into()))?;
                }
            }
        }
        Ok(ids)
    }

    /// Parse-free convenience: ingest MiniModel source.
    pub fn ingest_source(&mut self, source: &str) -> Result<Vec<String>, KgError> {
        let ast = crate::model_dsl::parse_model(source)?;
        let table = crate::model_dsl::extract_symbols(&ast);
        self.ingest_model(&ast, &table)
    }
}
