use geotree_kernels::baseline::{
    AverageAttributeSpec, GenerationAverageSpec, LengthKernel, PointcloudSpec, ShortestPathSpec, WlConfig,
};
use geotree_kernels::path::{KernelForm, LandmarkSpec, NodeKernelSpec};
use geotree_kernels::KernelSpec;

use crate::args::{Form, KernelName, KernelParams, Length};

fn node_spec(form: KernelForm, p: &KernelParams) -> NodeKernelSpec {
    NodeKernelSpec { form, use_attributes: p.attributed, lambda1: p.lambda1, lambda2: p.lambda2 }
}

pub fn from_flags(name: KernelName, p: &KernelParams) -> KernelSpec {
    let form = match (p.form, name) {
        (Some(Form::Linear), _) => KernelForm::Linear,
        (Some(Form::Gaussian), _) => KernelForm::Gaussian,
        (None, KernelName::RootpathNodeLinearFast) => KernelForm::Linear,
        (None, _) => KernelForm::Gaussian,
    };
    let landmarks = LandmarkSpec { landmarks: p.landmarks, form, lambda: p.lambda };
    match name {
        KernelName::AllPairsEmbedded => KernelSpec::AllPairsEmbedded(landmarks),
        KernelName::RootpathEmbedded => KernelSpec::RootpathEmbedded(landmarks),
        KernelName::AllPairsNode => KernelSpec::AllPairsNode(node_spec(form, p)),
        KernelName::RootpathNodeNaive => KernelSpec::RootpathNodeNaive(node_spec(form, p)),
        KernelName::RootpathNode => KernelSpec::RootpathNode(node_spec(form, p)),
        KernelName::RootpathNodeLinearFast => KernelSpec::RootpathNodeLinearFast(node_spec(form, p)),
        KernelName::Pointcloud => KernelSpec::Pointcloud(PointcloudSpec { lambda1: p.lambda1, lambda2: p.lambda2 }),
        KernelName::Aaw => KernelSpec::Aaw(AverageAttributeSpec { form, attr_index: p.attr_index }),
        KernelName::Agaw => KernelSpec::Agaw(GenerationAverageSpec {
            form,
            attr_index: p.attr_index,
            gen_lo: p.gen_lo,
            gen_hi: p.gen_hi,
        }),
        KernelName::Lbc => KernelSpec::Lbc,
        KernelName::Gbc => KernelSpec::Gbc,
        KernelName::Sp => KernelSpec::Sp(ShortestPathSpec {
            length_kernel: match p.length_kernel {
                Length::Delta => LengthKernel::Delta,
                Length::Linear => LengthKernel::Linear,
            },
        }),
        KernelName::Wl => KernelSpec::Wl(WlConfig { iterations: p.iterations }),
    }
}
