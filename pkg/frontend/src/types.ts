/** Shared types for the annotation wizard. */

export interface TreeOption {
  label: string;
  bits: string;
  next?: TreeNode;
  leaf?: boolean;
}

export interface TreeNode {
  question: string;
  help?: string;
  options: TreeOption[];
}

export interface ManifestClip {
  id: string;
  uri: string;
  noun: string | null;
  verb: string | null;
  annotated: boolean;
}

export interface AnnotationBody {
  clip_id: string;
  code: string;
  annotator: string;
}
