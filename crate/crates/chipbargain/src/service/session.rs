//! One live game with a single human seat.

use chipbargain_core::agents::{AgentSpec, Observation};
use chipbargain_core::game::{
    check_offer, proposer_delta, responder_delta, surplus_gain, welfare, AllocationMatrix, GameConfig,
    GameState, OfferViolation, TurnRecord,
};
use chipbargain_core::log::GameLog;
use chipbargain_core::play::{commit_turn, propose_checked};
use chipbargain_core::agents::Agent;
use chipbargain_core::{Cents, Offer, PlayerId, Response, TradeOffer};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::harness::{Roster, Seat};

pub const SCHEMA: u32 = 1;

const ANIMALS: [&str; 16] = [
    "Otter", "Heron", "Lynx", "Badger", "Marten", "Ibis", "Gecko", "Bison", "Puffin", "Tapir",
    "Walrus", "Koala", "Falcon", "Newt", "Yak", "Moose",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum EventKind {
    TurnOpened { round: u32, turn: u32, proposer: PlayerId },
    ProposalMade {
        turn: u32,
        proposer: PlayerId,
        offer: TradeOffer,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        invalid_proposal: Option<OfferViolation>,
    },
    ResponsesRevealed {
        turn: u32,
        responses: Vec<Option<Response>>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        coerced: Vec<PlayerId>,
    },
    TradeExecuted {
        turn: u32,
        proposer: PlayerId,
        acceptor: PlayerId,
        offer: Offer,
        holdings: AllocationMatrix,
    },
    TradeFailed { turn: u32, reason: FailReason },
    GameEnded {
        abandoned: bool,
        /// Surplus gain of every player, in cents.
        surplus_gain: Vec<Cents>,
        /// The human seat's surplus gain.
        payout: Cents,
        final_holdings: AllocationMatrix,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailReason {
    Pass,
    NoAccepter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// What the session is waiting for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Awaiting {
    HumanProposal,
    HumanResponse,
    Agents,
    Ended,
}

#[derive(Debug, Clone)]
enum Pending {
    Proposal,
    Responses {
        offer: TradeOffer,
        violation: Option<OfferViolation>,
        human: Option<Response>,
    },
    Ended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionError {
    /// Not the human's move, or the game is over.
    Conflict(&'static str),
    Invalid(OfferViolation),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveOffer {
    pub proposer: PlayerId,
    pub offer: Offer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Payout {
    pub abandoned: bool,
    pub surplus_gain: Vec<Cents>,
    pub payout: Cents,
}

/// Everything the human seat may see.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanView {
    pub schema: u32,
    pub session_id: String,
    pub seat: PlayerId,
    pub labels: Vec<String>,
    pub colors: Vec<String>,
    pub my_values: Vec<Cents>,
    pub my_total_value: Cents,
    pub holdings: AllocationMatrix,
    pub round: u32,
    pub turn: u32,
    pub total_turns: u32,
    pub turn_order: Vec<PlayerId>,
    pub proposer: Option<PlayerId>,
    /// `your_proposal`, `your_response`, `waiting` or `ended`.
    pub phase: String,
    pub active_offer: Option<ActiveOffer>,
    pub can_accept: Option<bool>,
    pub history: Vec<TurnRecord>,
    pub payout: Option<Payout>,
    pub last_seq: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreviewRole {
    Proposer,
    Responder,
}

/// Projected change in the human's holdings value if an offer trades.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preview {
    pub schema: u32,
    pub role: PreviewRole,
    pub offer: Offer,
    /// Whether the human could submit this offer (proposer) or accept it
    /// (responder) right now.
    pub valid: bool,
    pub violation: Option<OfferViolation>,
    pub current_value: Cents,
    pub value_change: Cents,
    pub projected_value: Cents,
}

pub struct Session {
    id: u64,
    human: PlayerId,
    specs: Vec<AgentSpec>,
    labels: Vec<String>,
    state: GameState,
    seats: Vec<Seat>,
    pending: Pending,
    events: Vec<Event>,
    payout: Option<Payout>,
}

impl Session {
    /// `agents` fills the non-human seats in order.
    pub fn new(
        id: u64,
        config: GameConfig,
        human: PlayerId,
        agents: &[AgentSpec],
        roster: &Roster,
    ) -> anyhow::Result<Self> {
        let n = config.n_players;
        anyhow::ensure!(human.0 < n, "human seat {} is out of range", human.0);
        anyhow::ensure!(agents.len() + 1 == n, "expected {} agent seats, got {}", n - 1, agents.len());
        anyhow::ensure!(!agents.iter().any(AgentSpec::is_human), "only one human seat is supported");
        let mut specs = agents.to_vec();
        specs.insert(human.0, AgentSpec::Human);
        roster.check(&specs)?;
        let state = GameState::new(config)?;
        let seats = roster.seats(&specs, state.config())?;
        let mut rng = rand::rngs::StdRng::seed_from_u64(state.config().rng_seed ^ 0xA11A1);
        let labels = ANIMALS.choose_multiple(&mut rng, n).map(|a| a.to_string()).collect();
        let mut s = Session {
            id,
            human,
            specs,
            labels,
            state,
            seats,
            pending: Pending::Proposal,
            events: Vec::new(),
            payout: None,
        };
        s.open_turn();
        Ok(s)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn id_string(&self) -> String {
        format!("{:016x}", self.id)
    }

    pub fn human(&self) -> PlayerId {
        self.human
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn events_since(&self, since: u64) -> &[Event] {
        // seq is 1-based and gapless
        let from = (since as usize).min(self.events.len());
        &self.events[from..]
    }

    pub fn last_seq(&self) -> u64 {
        self.events.len() as u64
    }

    pub fn is_ended(&self) -> bool {
        matches!(self.pending, Pending::Ended)
    }

    pub fn log(&self) -> GameLog {
        GameLog::from_state(self.id, self.specs.iter().map(ToString::to_string).collect(), &self.state)
    }

    fn emit(&mut self, kind: EventKind) {
        let seq = self.events.len() as u64 + 1;
        self.events.push(Event { seq, kind });
    }

    fn open_turn(&mut self) {
        match self.state.current_proposer() {
            Some(p) => {
                self.pending = Pending::Proposal;
                self.emit(EventKind::TurnOpened {
                    round: self.state.round(),
                    turn: self.state.turn_index() as u32,
                    proposer: p,
                });
            }
            None => self.end(false),
        }
    }

    fn end(&mut self, abandoned: bool) {
        let gain = surplus_gain(&self.state).per_player;
        let payout = Payout { abandoned, payout: gain[self.human.0], surplus_gain: gain.clone() };
        self.emit(EventKind::GameEnded {
            abandoned,
            surplus_gain: gain,
            payout: payout.payout,
            final_holdings: self.state.holdings().clone(),
        });
        self.payout = Some(payout);
        self.pending = Pending::Ended;
    }

    pub fn awaiting(&self) -> Awaiting {
        match &self.pending {
            Pending::Ended => Awaiting::Ended,
            Pending::Proposal => {
                if self.state.current_proposer() == Some(self.human) {
                    Awaiting::HumanProposal
                } else {
                    Awaiting::Agents
                }
            }
            Pending::Responses { offer, human, .. } => {
                let asked = !offer.is_pass() && self.state.current_proposer() != Some(self.human);
                if asked && human.is_none() {
                    Awaiting::HumanResponse
                } else {
                    Awaiting::Agents
                }
            }
        }
    }

    fn propose(&mut self, offer: TradeOffer, violation: Option<OfferViolation>) {
        let proposer = self.state.current_proposer().expect("proposal phase has a proposer");
        self.emit(EventKind::ProposalMade {
            turn: self.state.turn_index() as u32,
            proposer,
            offer,
            invalid_proposal: violation,
        });
        self.pending = Pending::Responses { offer, violation, human: None };
    }

    /// Plays one agent decision: an agent's proposal, or the resolution of
    /// the current offer once the human (if asked) has answered.
    pub fn agent_step(&mut self) -> anyhow::Result<()> {
        if self.awaiting() != Awaiting::Agents {
            return Ok(());
        }
        match self.pending.clone() {
            Pending::Proposal => {
                let p = self.state.current_proposer().expect("open turn");
                let (offer, violation) = propose_checked(&self.state, &mut self.seats[p.0])?;
                self.propose(offer, violation);
            }
            Pending::Responses { offer, violation, human } => self.resolve(offer, violation, human)?,
            Pending::Ended => {}
        }
        Ok(())
    }

    fn resolve(
        &mut self,
        offer: TradeOffer,
        violation: Option<OfferViolation>,
        human: Option<Response>,
    ) -> anyhow::Result<()> {
        let proposer = self.state.current_proposer();
        let mut responses = Vec::with_capacity(self.seats.len());
        for (i, seat) in self.seats.iter_mut().enumerate() {
            let p = PlayerId(i);
            responses.push(if Some(p) == proposer {
                None
            } else {
                Some(match (&offer, p == self.human) {
                    (TradeOffer::Pass, _) => Response::Decline,
                    (TradeOffer::Trade(_), true) => human.unwrap_or(Response::Decline),
                    (TradeOffer::Trade(o), false) => {
                        seat.respond(&Observation::for_player(&self.state, p), o)
                    }
                })
            });
        }
        let rec = commit_turn(&mut self.state, &offer, &responses, violation, &mut self.seats)?;
        match rec.offer {
            TradeOffer::Pass => self.emit(EventKind::TradeFailed { turn: rec.turn, reason: FailReason::Pass }),
            TradeOffer::Trade(o) => {
                self.emit(EventKind::ResponsesRevealed {
                    turn: rec.turn,
                    responses: rec.responses.clone(),
                    coerced: rec.coerced.clone(),
                });
                match rec.selected_acceptor.filter(|_| rec.executed) {
                    Some(a) => self.emit(EventKind::TradeExecuted {
                        turn: rec.turn,
                        proposer: rec.proposer,
                        acceptor: a,
                        offer: o,
                        holdings: rec.post_holdings.clone(),
                    }),
                    None => self.emit(EventKind::TradeFailed {
                        turn: rec.turn,
                        reason: FailReason::NoAccepter,
                    }),
                }
            }
        }
        self.open_turn();
        Ok(())
    }

    /// Plays agent decisions until the human must act or the game ends.
    pub fn run_agents(&mut self) -> anyhow::Result<()> {
        while self.awaiting() == Awaiting::Agents {
            self.agent_step()?;
        }
        Ok(())
    }

    pub fn submit_proposal(&mut self, offer: TradeOffer) -> Result<(), ActionError> {
        match self.awaiting() {
            Awaiting::HumanProposal => {}
            Awaiting::Ended => return Err(ActionError::Conflict("game_over")),
            _ => return Err(ActionError::Conflict("not_your_turn")),
        }
        self.state.validate_offer(self.human, &offer).map_err(ActionError::Invalid)?;
        self.propose(offer, None);
        Ok(())
    }

    pub fn submit_response(&mut self, response: Response) -> Result<(), ActionError> {
        match self.awaiting() {
            Awaiting::HumanResponse => {}
            Awaiting::Ended => return Err(ActionError::Conflict("game_over")),
            _ => return Err(ActionError::Conflict("not_your_turn")),
        }
        let Pending::Responses { offer, human, .. } = &mut self.pending else {
            unreachable!("awaiting a response")
        };
        if response == Response::Accept && !self.state.responder_can_accept(self.human, offer) {
            return Err(ActionError::Invalid(OfferViolation::InsufficientInventory));
        }
        *human = Some(response);
        Ok(())
    }

    /// Ends the game where it stands. A turn in progress is discarded.
    pub fn abandon(&mut self) {
        if !self.is_ended() {
            self.end(true);
        }
    }

    fn active_offer(&self) -> Option<ActiveOffer> {
        match &self.pending {
            Pending::Responses { offer: TradeOffer::Trade(o), .. } => Some(ActiveOffer {
                proposer: self.state.current_proposer()?,
                offer: *o,
            }),
            _ => None,
        }
    }

    pub fn view(&self) -> HumanView {
        let me = self.human;
        let values = self.state.valuations().row(me).to_vec();
        let active = self.active_offer();
        let awaiting = self.awaiting();
        let phase = match awaiting {
            Awaiting::HumanProposal => "your_proposal",
            Awaiting::HumanResponse => "your_response",
            Awaiting::Agents => "waiting",
            Awaiting::Ended => "ended",
        };
        let can_accept = match (&active, awaiting) {
            (Some(a), Awaiting::HumanResponse) => {
                Some(self.state.responder_can_accept(me, &TradeOffer::Trade(a.offer)))
            }
            _ => None,
        };
        HumanView {
            schema: SCHEMA,
            session_id: self.id_string(),
            seat: me,
            labels: self.labels.clone(),
            colors: self.state.config().colors.clone(),
            my_values: values,
            my_total_value: welfare(self.state.valuations(), self.state.holdings(), me),
            holdings: self.state.holdings().clone(),
            round: self.state.round(),
            turn: self.state.turn_index() as u32,
            total_turns: self.state.config().total_turns() as u32,
            turn_order: self.state.turn_order().to_vec(),
            proposer: self.state.current_proposer(),
            phase: phase.to_string(),
            active_offer: active,
            can_accept,
            history: self.state.history().to_vec(),
            payout: self.payout.clone(),
            last_seq: self.last_seq(),
        }
    }

    /// Projection for `offer` as the human's own proposal, or for the
    /// offer on the table when `offer` is `None`.
    pub fn preview(&self, offer: Option<Offer>) -> Result<Preview, ActionError> {
        let me = self.human;
        let values = self.state.valuations();
        let current = welfare(values, self.state.holdings(), me);
        let (role, offer, violation, change) = match offer {
            Some(o) => {
                let trade = TradeOffer::Trade(o);
                let violation =
                    check_offer(self.state.config(), self.state.holdings(), me, &trade).err();
                let change = if violation == Some(OfferViolation::UnknownColor) {
                    Cents(0)
                } else {
                    proposer_delta(values, me, &trade).unwrap_or(Cents(0))
                };
                (PreviewRole::Proposer, o, violation, change)
            }
            None => {
                let active = self.active_offer().ok_or(ActionError::Conflict("no_active_offer"))?;
                if active.proposer == me {
                    return Err(ActionError::Conflict("no_active_offer"));
                }
                let o = active.offer;
                let ok = self.state.responder_can_accept(me, &TradeOffer::Trade(o));
                let violation = (!ok).then_some(OfferViolation::InsufficientInventory);
                let change = responder_delta(values, me, &TradeOffer::Trade(o)).unwrap_or(Cents(0));
                (PreviewRole::Responder, o, violation, change)
            }
        };
        Ok(Preview {
            schema: SCHEMA,
            role,
            offer,
            valid: violation.is_none(),
            violation,
            current_value: current,
            value_change: change,
            projected_value: current + change,
        })
    }
}
