/** Wire types of the wallet agent's HTTP API. */

export interface HealthResponse {
  ok: boolean;
  label: string;
}

/** The QR / paste payload that lets a wallet connect back to an agent. */
export interface ConnectionOfferPayload {
  offer_id: string;
  endpoint: string;
  sender_did: string;
  sender_verkey: string;
  label: string;
}

export interface Connection {
  my_did: string;
  their_did: string;
  their_verkey: string;
  their_endpoint: string;
  label: string;
  state: string;
}

interface PendingBase {
  id: string;
  connection_id: string;
  connection_label: string;
  thread_id: string;
  received_at: number;
}

export interface PendingCredentialOffer extends PendingBase {
  kind: "credential_offer";
  body: {
    claim_def_seq_no: number;
    schema_seq_no: number;
    issuer_did: string;
    preview: Record<string, unknown>;
  };
}

export interface PendingProofRequest extends PendingBase {
  kind: "proof_request";
  requested_attributes: string[];
  requested_predicates: string[];
  body: {
    name: string;
    nonce: string;
  };
}

export type PendingEntry = PendingCredentialOffer | PendingProofRequest;

export interface StoredCredential {
  id: string;
  schema_seq_no: number;
  claim_def_seq_no: number;
  issuer_did: string;
  subject_did: string;
  attributes: Record<string, { value: unknown; salt: string }>;
  issued_at: number;
}

export interface ApproveResponse {
  status: string;
  credential_id?: string;
  disclosed?: string[];
  thread_id?: string;
}

export interface DenyResponse {
  status: string;
  thread_id?: string;
}
