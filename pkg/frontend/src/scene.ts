// Scene description mirroring the pipeline's JSON schema.

export type ShapeSpec =
  | { type: "box"; half_extents: [number, number, number] }
  | { type: "sphere"; radius: number }
  | { type: "cylinder"; radius: number; half_height: number }
  | { type: "mesh"; vertices: number[][]; triangles: number[][] };

export interface PoseSpec {
  rotation: number[]; // 3x3, row-major
  translation: [number, number, number];
}

export interface ObjectSpec {
  id: number;
  shape: ShapeSpec;
  pose: PoseSpec;
}

export interface CameraSpec {
  pose: PoseSpec;
  image_size: [number, number];
  focal: [number, number];
  principal: [number, number];
}

export interface SceneSpec {
  objects: ObjectSpec[];
  table: { radius: number } | null;
  camera?: CameraSpec;
}

export function sceneToJson(scene: SceneSpec): string {
  return JSON.stringify(scene, null, 1) + "\n";
}

export function identityPose(translation: [number, number, number]): PoseSpec {
  return { rotation: [1, 0, 0, 0, 1, 0, 0, 0, 1], translation };
}
