"""Export torchvision VGG19 convolution weights for the perceptual extractor.

    python tools/export_vgg19.py --out vgg19_features.pt

Writes a TorchScript module whose submodules conv1_1, conv1_2, ... hold the
ImageNet weights of every convolution up to --deepest (default relu3_1).
"""

import argparse

import torch
import torch.nn as nn
import torchvision


class Features(nn.Module):
    # weights container only; the C++ side rebuilds the network
    def __init__(self, convs):
        super().__init__()
        for name, conv in convs:
            setattr(self, name, conv)

    def forward(self, x):
        return x


def named_convs(features, deepest):
    block, index = 1, 0
    out = []
    for layer in features:
        if isinstance(layer, nn.MaxPool2d):
            block, index = block + 1, 0
        elif isinstance(layer, nn.Conv2d):
            index += 1
            out.append((f"conv{block}_{index}", layer))
            if f"relu{block}_{index}" == deepest:
                return out
    raise SystemExit(f"unknown layer {deepest}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True)
    ap.add_argument("--deepest", default="relu3_1")
    ap.add_argument("--state-dict", help="local torchvision vgg19 state dict instead of downloading")
    ap.add_argument("--random", action="store_true", help="skip pretrained weights (format testing only)")
    args = ap.parse_args()

    if args.random:
        vgg = torchvision.models.vgg19(weights=None)
    elif args.state_dict:
        vgg = torchvision.models.vgg19(weights=None)
        vgg.load_state_dict(torch.load(args.state_dict, map_location="cpu"))
    else:
        vgg = torchvision.models.vgg19(weights=torchvision.models.VGG19_Weights.IMAGENET1K_V1)

    convs = named_convs(vgg.features.eval(), args.deepest)
    torch.jit.script(Features(convs)).save(args.out)
    print(f"{args.out}: {', '.join(n for n, _ in convs)}")


if __name__ == "__main__":
    main()
