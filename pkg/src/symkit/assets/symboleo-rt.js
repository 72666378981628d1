// symboleo-rt: shared runtime support for generated monitoring contracts.
// Vendored as a static asset; not part of the generated-code line counts.
'use strict';

const OBLIGATION_STATES = ['Created', 'InEffect', 'Suspended', 'Fulfilled', 'Violated'];
const POWER_STATES = ['Created', 'InEffect', 'Exerted', 'Expired'];
const CONTRACT_STATES = ['InEffect', 'Fulfilled', 'Terminated'];

class ChaincodeEvent {
  constructor(type, id, timestamp) {
    this.type = type;
    this.id = id;
    this.timestamp = timestamp;
  }

  static requireNumber(attributes, name) {
    const value = attributes[name];
    if (typeof value !== 'number') {
      throw new Error(`attribute ${name} must be a number`);
    }
    return value;
  }

  static requireString(attributes, name) {
    const value = attributes[name];
    if (typeof value !== 'string') {
      throw new Error(`attribute ${name} must be a string`);
    }
    return value;
  }

  static requireDate(attributes, name) {
    const value = new Date(attributes[name]);
    if (Number.isNaN(value.getTime())) {
      throw new Error(`attribute ${name} must be a date`);
    }
    return value;
  }
}

class ContractParty {
  constructor(type, id) {
    this.type = type;
    this.id = id;
  }
}

class ContractAsset {
  constructor(type, id, attributes) {
    this.type = type;
    this.id = id;
    this.attributes = attributes;
  }
}

const SymProp = {
  always: () => ({ op: 'true' }),
  never: () => ({ op: 'false' }),
  and: (lhs, rhs) => ({ op: 'and', lhs, rhs }),
  or: (lhs, rhs) => ({ op: 'or', lhs, rhs }),
  not: (arg) => ({ op: 'not', arg }),
  happens: (event) => ({ op: 'happens', event }),
  happensBefore: (event, point) => ({ op: 'happens_before', event, point }),
  happensAfter: (event, point) => ({ op: 'happens_after', event, point }),
  happensWithin: (event, interval) => ({ op: 'happens_within', event, interval }),
  violated: (obligation) => ({ op: 'violated', obligation }),
  fulfilled: (obligation) => ({ op: 'fulfilled', obligation }),
  attrCmp: (event, attribute, cmp, operand) => ({ op: 'attr_cmp', event, attribute, cmp, operand }),
};

const SymTime = {
  date: (iso) => ({ kind: 'date', value: iso }),
  between: (start, end) => ({ kind: 'absolute', start, end }),
  window: (name) => ({ kind: 'window', name }),
};

class MonitoredContract {
  constructor(name) {
    this.name = name;
    this.clock = null;
    this.log = [];
    this.obligations = new Map();
    this.powers = new Map();
    this.windows = new Map();
    this.declarations = { roles: new Map(), assets: new Map(), events: new Map() };
    this.state = 'InEffect';
  }

  bindParameters(schema) {
    const bound = {};
    for (const name of Object.keys(schema)) {
      bound[name] = { kind: 'param', name };
    }
    return bound;
  }

  declareRole(id, type) {
    this.declarations.roles.set(id, new ContractParty(type, id));
  }

  declareAsset(id, type, attributes) {
    this.declarations.assets.set(id, new ContractAsset(type, id, attributes));
  }

  declareEvent(id, type) {
    this.declarations.events.set(id, { id, type, occurrences: [] });
  }

  declareEventType(id, ctor) {
    const entry = this.declarations.events.get(id);
    if (entry) {
      entry.ctor = ctor;
    }
  }

  declareWindow(name, spec) {
    this.windows.set(name, spec);
  }

  registerObligation(id, machine) {
    this.obligations.set(id, { ...machine, state: 'Created' });
  }

  registerPower(id, machine) {
    this.powers.set(id, { ...machine, state: 'Created' });
  }

  submitEvent(occurrence) {
    const entry = this.declarations.events.get(occurrence.id);
    if (!entry) {
      throw new Error(`unknown event binding: ${occurrence.id}`);
    }
    entry.occurrences.push(occurrence);
    this.log.push(occurrence);
    this.clock = occurrence.timestamp;
    return this.reevaluate();
  }

  advanceClock(timestamp) {
    this.clock = timestamp;
    return this.reevaluate();
  }

  reevaluate() {
    // The ledger peer re-runs the deontic state machines here; transition
    // semantics live with the monitoring host, not in generated code.
    return { clock: this.clock, state: this.state };
  }
}

class EventRouter {
  constructor(contract) {
    this.contract = contract;
  }
}

module.exports = {
  CONTRACT_STATES,
  ChaincodeEvent,
  ContractAsset,
  ContractParty,
  EventRouter,
  MonitoredContract,
  OBLIGATION_STATES,
  POWER_STATES,
  SymProp,
  SymTime,
};
